#pragma once

#include <array>
#include <span>
#include <vector>

#include "ace/laplace.hpp"
#include "ace/model.hpp"

namespace ace {

// One minibatch prepared for the network: raw images plus both flattened
// pyramid bands, indexed by level_index().
struct MinibatchBands {
    Tensor images;               // [B, C, S, S]
    std::array<Tensor, 2> bands; // [B, band_dim(level)]

    std::size_t size() const { return images.dim(0); }
};

MinibatchBands make_minibatch(const Tensor& images);

// Generation-time latent targets (mu2, sigma2) per level, row-major
// [B, kLatentDim]. Run 1 uses the prior everywhere.
struct LatentTargets {
    std::array<std::vector<double>, 2> mu;
    std::array<std::vector<double>, 2> sigma;

    static LatentTargets prior(std::size_t batch);
    laplace::PosteriorParams at(Level level, std::size_t row, std::size_t dim) const;
};

// Uniform draws in (0,1) used for reparametrised sampling, [B, kLatentDim] per
// level. All 0.5 gives z = mu.
struct LatentNoise {
    std::array<std::vector<double>, 2> u;

    static LatentNoise median(std::size_t batch);
};

// -log of an isotropic unit-variance Gaussian: 0.5 |x - x'|^2 + (D/2) ln 2 pi.
// Inputs [B, D]; result [B].
Tensor reconstruction_error(const Tensor& band, const Tensor& decoded);

// Elementwise closed-form Laplace generative error of posterior heads
// (mu, sigma) [B, L] against fixed targets; result [B, L].
Tensor generative_error(const Tensor& mu, const Tensor& sigma, std::span<const double> target_mu,
                        std::span<const double> target_sigma);

// z = mu + sigma sqrt(0.5) s(u), with s the standard Laplace variate.
Tensor reparametrize(const Tensor& mu, const Tensor& sigma, std::span<const double> uniforms);

struct LevelLoss {
    HeadOutput heads;
    Tensor latents;          // [B, L]
    Tensor decoded;          // [B, D]
    Tensor reconstruction;   // [B]
    Tensor generative_dims;  // [B, L]
    Tensor generative;       // [B]
};

struct VaeLoss {
    std::array<LevelLoss, 2> levels;
    Tensor total;  // [B], per-observation -log L_VAE summed over levels
};

// Per-observation loss with every observation routed through class `cls`
// (heads and decoder).
VaeLoss vae_loss(AceModel& model, const MinibatchBands& batch, std::size_t cls,
                 const LatentTargets& targets, const LatentNoise& noise, Mode mode);

struct LossBreakdown {
    std::array<double, 2> reconstruction{};  // batch sums per level
    std::array<double, 2> generative{};
    double weighted_total = 0.0;
    Tensor objective;  // scalar: sum W (rec + gen) + sum W
};

// Weighted minibatch objective. Validates the weights first.
LossBreakdown weighted_minibatch_loss(const VaeLoss& loss, const Tensor& weights);

}  // namespace ace
