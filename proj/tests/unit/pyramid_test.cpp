#include <gtest/gtest.h>

#include <cmath>

#include "ace/pyramid.hpp"
#include "ace/rng.hpp"

namespace ace::pyramid {
namespace {

Tensor random_images(std::size_t b, std::uint32_t stream) {
    CounterRng rng(11, stream);
    std::vector<double> v(b * 3 * 32 * 32);
    for (double& x : v) x = rng.uniform();
    return Tensor({b, 3, 32, 32}, std::move(v));
}

TEST(Pyramid, RoundTripIsExact) {
    const Tensor x = random_images(8, 0);
    const auto d = decompose(x);
    EXPECT_EQ(d.coarse.shape(), (Shape{8, 3, 16, 16}));
    EXPECT_EQ(d.residual.shape(), (Shape{8, 3, 32, 32}));
    const Tensor r = reconstruct(d);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(r.values()[i], x.values()[i], 1e-12);
}

TEST(Pyramid, ResidualRangeAndCoarseIsBlockMax) {
    const Tensor x = random_images(2, 1);
    const auto d = decompose(x);
    for (double v : d.residual.values()) {
        EXPECT_LE(v, 0.0);
        EXPECT_GE(v, -1.0);
    }
    // Oracle: 2x2 block maxima.
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t y = 0; y < 16; ++y) {
            for (std::size_t xx = 0; xx < 16; ++xx) {
                double m = 0;
                for (std::size_t i = 0; i < 2; ++i)
                    for (std::size_t j = 0; j < 2; ++j)
                        m = std::max(m, x.values()[(c * 32 + 2 * y + i) * 32 + 2 * xx + j]);
                EXPECT_EQ(d.coarse.values()[(c * 16 + y) * 16 + xx], m);
            }
        }
    }
}

TEST(Pyramid, BlockConstantImagesHaveZeroResidual) {
    CounterRng rng(12, 0);
    std::vector<double> v(3 * 32 * 32);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < 16; ++y)
            for (std::size_t x = 0; x < 16; ++x) {
                const double val = rng.uniform();
                for (std::size_t i = 0; i < 2; ++i)
                    for (std::size_t j = 0; j < 2; ++j) v[(c * 32 + 2 * y + i) * 32 + 2 * x + j] = val;
            }
    const auto d = decompose_image(Tensor({3, 32, 32}, v));
    for (double r : d.residual.values()) EXPECT_EQ(r, 0.0);
}

TEST(Pyramid, ZeroResidualReconstructsBlocky) {
    const Tensor x = random_images(1, 2);
    const auto d = decompose(x);
    const Tensor blocky = reconstruct(d.coarse, Tensor::zeros(d.residual.shape()));
    for (std::size_t y = 0; y < 32; y += 2) {
        EXPECT_EQ(blocky.values()[y * 32], blocky.values()[(y + 1) * 32 + 1]);
    }
}

TEST(Pyramid, IdempotentAndLinearReconstruct) {
    const Tensor x = random_images(1, 3);
    const auto d1 = decompose(x);
    const auto d2 = decompose(reconstruct(d1));
    for (std::size_t i = 0; i < d1.coarse.size(); ++i) EXPECT_NEAR(d2.coarse.values()[i], d1.coarse.values()[i], 1e-15);
    const auto e = decompose(random_images(1, 4));
    std::vector<double> c(d1.coarse.size()), r(d1.residual.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 2.0 * d1.coarse.values()[i] - 0.5 * e.coarse.values()[i];
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = 2.0 * d1.residual.values()[i] - 0.5 * e.residual.values()[i];
    const Tensor lin = reconstruct(Tensor(d1.coarse.shape(), c), Tensor(d1.residual.shape(), r));
    const Tensor ra = reconstruct(d1), rb = reconstruct(e);
    for (std::size_t i = 0; i < lin.size(); ++i) {
        EXPECT_NEAR(lin.values()[i], 2.0 * ra.values()[i] - 0.5 * rb.values()[i], 1e-13);
    }
}

TEST(Pyramid, RejectsBadShapes) {
    EXPECT_THROW(decompose(Tensor::zeros({1, 3, 31, 32})), std::invalid_argument);
    EXPECT_THROW(reconstruct(Tensor::zeros({1, 3, 8, 8}), Tensor::zeros({1, 3, 32, 32})), std::invalid_argument);
    EXPECT_THROW(decompose_image(Tensor::zeros({3, 16, 16})), std::invalid_argument);
}

}  // namespace
}  // namespace ace::pyramid
