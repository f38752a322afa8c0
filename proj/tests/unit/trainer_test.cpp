#include <gtest/gtest.h>

#include "ace/errors.hpp"
#include "ace/trainer.hpp"
#include "synthetic.hpp"

namespace ace {
namespace {

TrainConfig small_run() {
    TrainConfig c;
    c.batch_size = 10;
    c.epochs = 2;
    c.seed = 4;
    c.hardcoded = {8, 12};
    c.model.classifier_channels = {4, 4, 8};
    c.model.init_seed = 4;
    return c;
}

const dataio::Dataset& small_data() {
    static const dataio::Dataset d = dataio::subset(testing::synthetic_train(), 40);
    return d;
}

TEST(TrainConfig, Validation) {
    TrainConfig c = small_run();
    EXPECT_NO_THROW(c.validate(40));
    EXPECT_THROW(c.validate(45), std::invalid_argument);
    c.hardcoded = {8, 9};
    EXPECT_THROW(c.validate(40), std::invalid_argument);
    c.hardcoded = {8, 8};
    EXPECT_THROW(c.validate(40), std::invalid_argument);
    c.hardcoded = {40};
    EXPECT_THROW(c.validate(40), std::invalid_argument);

    TrainConfig full;
    full.hardcoded = {8, 1020, 2016};
    EXPECT_EQ(*full.hardcoded_in(0), 8u);
    EXPECT_EQ(*full.hardcoded_in(1), 20u);
    EXPECT_EQ(*full.hardcoded_in(2), 16u);
    EXPECT_FALSE(full.hardcoded_in(3));
    EXPECT_NO_THROW(full.validate(50000));
}

TEST(Trainer, RunIsDeterministicAndCountsDominants) {
    const auto a = train_run(small_run(), small_data());
    const auto b = train_run(small_run(), small_data());
    ASSERT_EQ(a.metrics.size(), 2u);
    for (std::size_t e = 0; e < 2; ++e) EXPECT_EQ(a.metrics[e].csv_line(), b.metrics[e].csv_line());
    EXPECT_EQ(a.registry, b.registry);
    EXPECT_EQ(a.metrics.back().dominant.size(), 4u);
    EXPECT_EQ(a.metrics.back().dominant[0], 8u);
    EXPECT_EQ(a.metrics.back().dominant[1], 12u);
    EXPECT_TRUE(a.registry.complete(40));
    EXPECT_TRUE(a.initial_generative_error.empty());
    for (std::size_t t = 0; t < 4; ++t) EXPECT_EQ(a.metrics.back().dominant[t] / 10, t);
}

TEST(Trainer, PreconditionsOfLaterRuns) {
    TrainConfig c = small_run();
    c.run_number = 2;
    EXPECT_THROW(train_run(c, small_data()), std::invalid_argument);
    DriftRegistry partial;
    EXPECT_THROW(train_run(c, small_data(), &partial), InputError);
    c.run_number = 1;
    const auto r1 = train_run(c, small_data());
    c.run_number = 1;
    EXPECT_THROW(train_run(c, small_data(), &r1.registry), std::invalid_argument);
}

TEST(Trainer, SecondRunStartsAtZeroGenerativeError) {
    TrainConfig c = small_run();
    const auto r1 = train_run(c, small_data());
    const Checkpoint ck = make_checkpoint(r1.model, &r1.optimizer, 1);
    c.run_number = 2;
    c.epochs = 1;
    const auto r2 = train_run(c, small_data(), &r1.registry, &ck);
    ASSERT_EQ(r2.initial_generative_error.size(), 40u);
    for (double g : r2.initial_generative_error) EXPECT_EQ(g, 0.0);
    EXPECT_EQ(r2.metrics[0].run, 2);
}

TEST(Trainer, PriorInitialisedHeadsGiveUnitRows) {
    AceModel m(small_run().model);
    m.zero_sampler_heads();
    const DriftRegistry r = extract_drifts(m, small_data());
    for (const auto& [i, d] : r.rows()) {
        for (const auto& level : d) {
            for (const auto& p : level) {
                EXPECT_EQ(p.mu, 0.0);
                EXPECT_EQ(p.sigma, 1.0);
            }
        }
    }
    EXPECT_EQ(extract_drifts(m, small_data()), r);
}

TEST(Trainer, ReconstructionReportIsStable) {
    AceModel m(small_run().model);
    const auto a = reconstruction_report(m, small_data());
    const auto b = reconstruction_report(m, small_data());
    EXPECT_EQ(a, b);
    ASSERT_EQ(a.size(), 40u);
    EXPECT_GT(a[0], 0.0);
}

TEST(Trainer, Median) {
    EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
    EXPECT_THROW(median({}), std::invalid_argument);
}

}  // namespace
}  // namespace ace
