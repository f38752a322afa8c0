#include "ace/generator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ace {

namespace {

Tensor latents(const std::vector<double>& values) {
    return Tensor({values.size() / kLatentDim, kLatentDim}, values);
}

std::vector<double> drift_mu(const ObservationDrift& drift, std::size_t li) {
    return {drift[li][0].mu, drift[li][1].mu};
}

}  // namespace

void GridSpec::validate() const {
    if (n_per_axis < 2) throw std::invalid_argument("grid needs at least 2 points per axis");
    if (!(span > 0.0) || !std::isfinite(span)) throw std::invalid_argument("grid span must be positive");
}

double GridSpec::offset(std::size_t i) const {
    const double n = static_cast<double>(n_per_axis);
    return span * (2.0 * static_cast<double>(i) - (n - 1.0)) / (n - 1.0);
}

std::vector<GridCell> grid_cells(const GridSpec& spec) {
    spec.validate();
    std::vector<GridCell> cells;
    cells.reserve(spec.n_per_axis * spec.n_per_axis);
    for (std::size_t y = 0; y < spec.n_per_axis; ++y) {
        for (std::size_t x = 0; x < spec.n_per_axis; ++x) cells.push_back({y, x, spec.offset(x), spec.offset(y)});
    }
    return cells;
}

Tensor decode_at(AceModel& model, const ObservationDrift& drift, std::size_t cls) {
    NoGradGuard guard;
    return decode_images(model, latents(drift_mu(drift, 0)), latents(drift_mu(drift, 1)), cls);
}

Tensor perturbation_grid(AceModel& model, const GridSpec& spec, const ObservationDrift& drift, std::size_t cls) {
    NoGradGuard guard;
    const auto cells = grid_cells(spec);
    const std::size_t varied = level_index(spec.varied_level);
    std::array<std::vector<double>, 2> z;
    for (const auto& c : cells) {
        for (std::size_t li = 0; li < 2; ++li) {
            const auto mu = drift_mu(drift, li);
            if (li == varied) {
                z[li].push_back(mu[0] + c.gx);
                z[li].push_back(mu[1] + c.gy);
            } else {
                z[li].insert(z[li].end(), mu.begin(), mu.end());
            }
        }
    }
    return decode_images(model, latents(z[0]), latents(z[1]), cls);
}

Tensor interpolate(AceModel& model, const ObservationDrift& a, std::size_t cls_a, const ObservationDrift& b,
                   std::size_t cls_b, std::size_t steps) {
    if (cls_a != cls_b) {
        throw std::invalid_argument("interpolation endpoints belong to classes " + std::to_string(cls_a) + " and " +
                                    std::to_string(cls_b) + "; the decoder is class-specific");
    }
    if (steps < 2) throw std::invalid_argument("interpolation needs at least 2 steps");
    NoGradGuard guard;
    std::array<std::vector<double>, 2> z;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(steps - 1);
        for (std::size_t li = 0; li < 2; ++li) {
            for (std::size_t d = 0; d < kLatentDim; ++d) {
                // Endpoints reproduce the drifts exactly.
                const double v = k == 0           ? a[li][d].mu
                                 : k == steps - 1 ? b[li][d].mu
                                                  : (1.0 - t) * a[li][d].mu + t * b[li][d].mu;
                z[li].push_back(v);
            }
        }
    }
    return decode_images(model, latents(z[0]), latents(z[1]), cls_a);
}

Tensor zero_drift_baseline(AceModel& model, const GridSpec& spec, std::size_t cls) {
    ObservationDrift zero{};
    for (auto& level : zero) {
        for (auto& p : level) p = {0.0, 1.0};
    }
    return perturbation_grid(model, spec, zero, cls);
}

}  // namespace ace
