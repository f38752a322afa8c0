#include <gtest/gtest.h>

#include "ace/grad_check.hpp"
#include "ace/ops.hpp"

namespace ace {
namespace {

TEST(GradCheck, Quadratic) {
    const auto rep = grad_check([](const Tensor& x) { return sum(mul(x, x)); }, Tensor::scalar(3.0, true));
    ASSERT_EQ(rep.checked, 1u);
    EXPECT_NEAR(rep.worst.analytic, 6.0, 1e-12);
    EXPECT_NEAR(rep.worst.numeric, 6.0, 1e-8);
    EXPECT_LE(rep.max_rel_error, 1e-8);
    EXPECT_EQ(rep.kinks, 0u);
}

TEST(GradCheck, AbsAtZeroIsAKink) {
    const auto rep = grad_check([](const Tensor& x) { return sum(abs(x)); }, Tensor::scalar(0.0, true));
    EXPECT_EQ(rep.kinks, 1u);
    EXPECT_TRUE(rep.passed());
    EXPECT_NEAR(rep.worst.forward_slope, 1.0, 1e-9);
    EXPECT_NEAR(rep.worst.backward_slope, -1.0, 1e-9);
}

TEST(GradCheck, DetectsWrongGradient) {
    auto wrong = [](const Tensor& x) {
        std::vector<double> v{x.values()[0] * x.values()[0]};
        return Tensor::make({1}, v, {x}, [](std::span<const double> g, std::span<const std::shared_ptr<detail::Node>> p) {
            if (double* t = Tensor::grad_target(p[0])) t[0] += g[0] * 1.0;  // should be 2x
        });
    };
    const auto rep = grad_check([&](const Tensor& x) { return sum(wrong(x)); }, Tensor::scalar(3.0, true));
    EXPECT_FALSE(rep.passed());
    EXPECT_GT(rep.max_rel_error, 0.5);
}

TEST(GradCheck, ParameterSetNamesFailures) {
    ParameterSet ps;
    ps.add("w", Tensor({2}, {0.5, -0.25}, true));
    const auto rep = grad_check([&] { return sum(tanh(ps.at("w"))); }, ps);
    EXPECT_EQ(rep.checked, 2u);
    EXPECT_TRUE(rep.passed());
    EXPECT_EQ(rep.worst.name, "w");
}

}  // namespace
}  // namespace ace
