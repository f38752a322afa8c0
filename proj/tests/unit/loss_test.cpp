#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ace/grad_check.hpp"
#include "ace/loss.hpp"
#include "ace/pyramid.hpp"
#include "ace/rng.hpp"

namespace ace {
namespace {

ModelConfig toy_config() {
    ModelConfig c;
    c.image_side = 8;
    c.hidden = {5, 3};
    c.classifier_channels = {4, 4, 6};
    c.init_seed = 3;
    return c;
}

Tensor random_images(std::size_t b, std::size_t side, std::uint32_t stream) {
    CounterRng rng(23, stream);
    std::vector<double> v(b * 3 * side * side);
    for (double& x : v) x = rng.uniform();
    return Tensor({b, 3, side, side}, std::move(v));
}

TEST(Loss, ReconstructionErrorValue) {
    const Tensor band({1, 3}, {0.0, 1.0, 2.0});
    const Tensor dec({1, 3}, {1.0, 1.0, 0.0});
    const double expected = 0.5 * (1.0 + 0.0 + 4.0) + 1.5 * std::log(2.0 * std::numbers::pi);
    EXPECT_NEAR(reconstruction_error(band, dec).item(), expected, 1e-14);
    EXPECT_THROW(reconstruction_error(band, Tensor::zeros({1, 2})), std::invalid_argument);
}

TEST(Loss, GenerativeErrorOpGradient) {
    const std::vector<double> tm{0.3, -0.2, 1.0, 0.0};
    const std::vector<double> ts{0.5, 1.0, 2.0, 0.7};
    Tensor mu({2, 2}, {0.1, 0.4, -0.6, 0.9}, true);
    Tensor ls({2, 2}, {-0.3, 0.2, 0.5, -1.0}, true);
    ParameterSet ps;
    ps.add("mu", mu);
    ps.add("ls", ls);
    const auto rep = grad_check([&] { return sum(generative_error(mu, exp(ls), tm, ts)); }, ps);
    EXPECT_LE(rep.max_rel_error, 1e-4);
    const auto g = generative_error(Tensor({1, 2}, {0.3, -0.2}), Tensor({1, 2}, {0.5, 1.0}),
                                    std::vector<double>{0.3, -0.2}, std::vector<double>{0.5, 1.0});
    EXPECT_EQ(g.values()[0], 0.0);
    EXPECT_EQ(g.values()[1], 0.0);
}

TEST(Loss, MedianDrawIsTheLocation) {
    const Tensor mu({1, 2}, {0.25, -3.5});
    const Tensor sigma({1, 2}, {2.0, 0.1});
    const auto z = reparametrize(mu, sigma, std::vector<double>{0.5, 0.5});
    EXPECT_EQ(z.values()[0], 0.25);
    EXPECT_EQ(z.values()[1], -3.5);
    const auto z2 = reparametrize(mu, sigma, std::vector<double>{0.75, 0.25});
    EXPECT_NEAR(z2.values()[0], 0.25 + 2.0 * std::sqrt(0.5) * std::log(2.0), 1e-15);
}

TEST(Loss, PriorHeadsHaveZeroGenerativeError) {
    AceModel m(toy_config());
    m.zero_sampler_heads();
    const auto mb = make_minibatch(random_images(4, 8, 0));
    const auto loss = vae_loss(m, mb, 1, LatentTargets::prior(4), LatentNoise::median(4), Mode::train);
    for (const auto& lv : loss.levels) {
        for (double v : lv.generative.values()) EXPECT_EQ(v, 0.0);
    }
    EXPECT_EQ(loss.total.shape(), (Shape{4}));
    EXPECT_THROW(vae_loss(m, mb, 1, LatentTargets::prior(3), LatentNoise::median(4), Mode::train),
                 std::invalid_argument);
}

TEST(Loss, WeightedObjective) {
    AceModel m(toy_config());
    const Tensor images = random_images(4, 8, 1);
    const auto mb = make_minibatch(images);
    const auto loss = vae_loss(m, mb, 0, LatentTargets::prior(4), LatentNoise::median(4), Mode::train);
    const Tensor w({4}, {0.5, 2.0, 1.0, 0.5});
    const auto lb = weighted_minibatch_loss(loss, w);
    double expected = 0.0;
    for (std::size_t i = 0; i < 4; ++i) expected += w.values()[i] * loss.total.values()[i] + w.values()[i];
    EXPECT_NEAR(lb.weighted_total, expected, 1e-9 * std::abs(expected));
    EXPECT_THROW(weighted_minibatch_loss(loss, Tensor({4}, {1.0, 1.0, 1.0, 2.0})), std::invalid_argument);
}

TEST(Loss, MedianNoiseEvalMatchesDecodeImages) {
    AceModel m(toy_config());
    const Tensor images = random_images(4, 8, 2);
    const auto mb = make_minibatch(images);
    // Populate the running statistics first.
    (void)vae_loss(m, mb, 5, LatentTargets::prior(4), LatentNoise::median(4), Mode::train);
    const auto loss = vae_loss(m, mb, 5, LatentTargets::prior(4), LatentNoise::median(4), Mode::eval);
    const Tensor via_loss = pyramid::reconstruct(loss.levels[1].decoded.reshape({4, 3, 4, 4}),
                                                 loss.levels[0].decoded.reshape({4, 3, 8, 8}));
    const Tensor direct = decode_images(m, loss.levels[0].heads.mu, loss.levels[1].heads.mu, 5);
    for (std::size_t i = 0; i < direct.size(); ++i) ASSERT_EQ(direct.values()[i], via_loss.values()[i]);
}

TEST(Loss, ToyEndToEndGradient) {
    AceModel m(toy_config());
    const Tensor images = random_images(4, 8, 3);
    const auto mb = make_minibatch(images);
    LatentNoise noise;
    for (std::size_t l = 0; l < 2; ++l) {
        for (std::size_t i = 0; i < 8; ++i) noise.u[l].push_back(counter_uniform(4, 0, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(l), 0));
    }
    auto objective = [&] {
        const Tensor w = classifier_weights(m, images, std::nullopt, Mode::train);
        const auto loss = vae_loss(m, mb, 2, LatentTargets::prior(4), noise, Mode::train);
        return weighted_minibatch_loss(loss, w).objective;
    };
    const auto rep = grad_check(objective, m.parameters());
    EXPECT_LE(rep.max_rel_error, 1e-4) << rep.worst.name << "[" << rep.worst.index << "]";
}

}  // namespace
}  // namespace ace
