#include "ace/loss.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ace/ops.hpp"
#include "ace/pyramid.hpp"

namespace ace {

MinibatchBands make_minibatch(const Tensor& images) {
    NoGradGuard guard;
    auto d = pyramid::decompose(images);
    const std::size_t b = images.dim(0);
    MinibatchBands out;
    out.images = images;
    out.bands[level_index(Level::residual)] = d.residual.reshape({b, d.residual.size() / b});
    out.bands[level_index(Level::coarse)] = d.coarse.reshape({b, d.coarse.size() / b});
    return out;
}

LatentTargets LatentTargets::prior(std::size_t batch) {
    LatentTargets t;
    for (std::size_t l = 0; l < 2; ++l) {
        t.mu[l].assign(batch * kLatentDim, 0.0);
        t.sigma[l].assign(batch * kLatentDim, 1.0);
    }
    return t;
}

laplace::PosteriorParams LatentTargets::at(Level level, std::size_t row, std::size_t dim) const {
    const std::size_t i = row * kLatentDim + dim;
    return {mu[level_index(level)].at(i), sigma[level_index(level)].at(i)};
}

LatentNoise LatentNoise::median(std::size_t batch) {
    LatentNoise n;
    for (auto& u : n.u) u.assign(batch * kLatentDim, 0.5);
    return n;
}

Tensor reconstruction_error(const Tensor& band, const Tensor& decoded) {
    if (band.shape() != decoded.shape() || band.rank() != 2) {
        throw std::invalid_argument("reconstruction_error: band " + shape_string(band.shape()) +
                                    " vs decoded " + shape_string(decoded.shape()));
    }
    const double dim = static_cast<double>(band.dim(1));
    Tensor diff = sub(decoded, band);
    Tensor half_sq = scale(sum_rows(mul(diff, diff)), 0.5);
    return add_scalar(half_sq, 0.5 * dim * std::log(2.0 * std::numbers::pi));
}

Tensor generative_error(const Tensor& mu, const Tensor& sigma, std::span<const double> target_mu,
                        std::span<const double> target_sigma) {
    if (mu.shape() != sigma.shape() || target_mu.size() != mu.size() ||
        target_sigma.size() != mu.size()) {
        throw std::invalid_argument("generative_error: heads " + shape_string(mu.shape()) + "/" +
                                    shape_string(sigma.shape()) + " vs " +
                                    std::to_string(target_mu.size()) + " targets");
    }
    const std::size_t n = mu.size();
    auto m = mu.values();
    auto s = sigma.values();
    std::vector<double> out(n), d_mu(n), d_sigma(n);
    for (std::size_t i = 0; i < n; ++i) {
        const laplace::PosteriorParams post{m[i], s[i]};
        const laplace::PosteriorParams target{target_mu[i], target_sigma[i]};
        out[i] = laplace::generative_error(post, target);
        const auto g = laplace::generative_error_grad(post, target);
        d_mu[i] = g.d_mu;
        d_sigma[i] = g.d_sigma;
    }
    return Tensor::make(mu.shape(), std::move(out), {mu, sigma},
                        [d_mu = std::move(d_mu), d_sigma = std::move(d_sigma)](
                            std::span<const double> g, std::span<const std::shared_ptr<detail::Node>> p) {
                            if (double* t = Tensor::grad_target(p[0])) {
                                for (std::size_t i = 0; i < g.size(); ++i) t[i] += g[i] * d_mu[i];
                            }
                            if (double* t = Tensor::grad_target(p[1])) {
                                for (std::size_t i = 0; i < g.size(); ++i) t[i] += g[i] * d_sigma[i];
                            }
                        });
}

Tensor reparametrize(const Tensor& mu, const Tensor& sigma, std::span<const double> uniforms) {
    if (uniforms.size() != mu.size()) {
        throw std::invalid_argument("reparametrize: " + std::to_string(uniforms.size()) +
                                    " draws for heads " + shape_string(mu.shape()));
    }
    std::vector<double> noise(uniforms.size());
    for (std::size_t i = 0; i < noise.size(); ++i) {
        noise[i] = laplace::kUnitScale * laplace::standard_variate(uniforms[i]);
    }
    return add(mu, mul(sigma, Tensor(mu.shape(), std::move(noise))));
}

VaeLoss vae_loss(AceModel& model, const MinibatchBands& batch, std::size_t cls,
                 const LatentTargets& targets, const LatentNoise& noise, Mode mode) {
    const std::size_t b = batch.size();
    VaeLoss out;
    for (Level level : kLevels) {
        const std::size_t li = level_index(level);
        if (targets.mu[li].size() != b * kLatentDim || targets.sigma[li].size() != b * kLatentDim) {
            throw std::invalid_argument("vae_loss: missing latent targets for level " +
                                        std::to_string(static_cast<int>(level)));
        }
        auto& lv = out.levels[li];
        Tensor hidden = model.encode(level, batch.bands[li], mode);
        lv.heads = model.sampler_heads(level, hidden, cls);
        lv.latents = reparametrize(lv.heads.mu, lv.heads.sigma, noise.u[li]);
        lv.decoded = model.decode(level, lv.latents, cls, mode);
        lv.reconstruction = reconstruction_error(batch.bands[li], lv.decoded);
        lv.generative_dims = generative_error(lv.heads.mu, lv.heads.sigma, targets.mu[li], targets.sigma[li]);
        lv.generative = sum_rows(lv.generative_dims);
    }
    out.total = add(add(out.levels[0].reconstruction, out.levels[0].generative),
                    add(out.levels[1].reconstruction, out.levels[1].generative));
    return out;
}

LossBreakdown weighted_minibatch_loss(const VaeLoss& loss, const Tensor& weights) {
    if (weights.shape() != loss.total.shape()) {
        throw std::invalid_argument("weighted loss: weights " + shape_string(weights.shape()) +
                                    " vs batch " + shape_string(loss.total.shape()));
    }
    validate_weights(weights.values());
    LossBreakdown out;
    for (std::size_t l = 0; l < 2; ++l) {
        for (double v : loss.levels[l].reconstruction.values()) out.reconstruction[l] += v;
        for (double v : loss.levels[l].generative.values()) out.generative[l] += v;
    }
    out.objective = add(sum(mul(weights, loss.total)), sum(weights));
    out.weighted_total = out.objective.item();
    return out;
}

}  // namespace ace
