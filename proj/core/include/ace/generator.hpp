#pragma once

#include <cstddef>
#include <vector>

#include "ace/model.hpp"
#include "ace/registry.hpp"

namespace ace {

struct GridSpec {
    std::size_t n_per_axis = 15;
    double span = 7.0;  // offsets cover [-span, +span] in prior standard deviations
    std::size_t center_index = 0;
    Level varied_level = Level::coarse;

    void validate() const;
    // Offset of grid position i in 0..n-1; the middle position of an odd
    // grid is exactly 0.
    double offset(std::size_t i) const;
};

// Grid cell (row y, column x) sits at index y * n + x and adds
// (offset(x), offset(y)) to the varied level's latent.
struct GridCell {
    std::size_t row = 0;
    std::size_t column = 0;
    double gx = 0.0;
    double gy = 0.0;
};
std::vector<GridCell> grid_cells(const GridSpec& spec);

// Decodes z = mu at both levels under class `cls`: image [1, C, S, S].
Tensor decode_at(AceModel& model, const ObservationDrift& drift, std::size_t cls);

// n*n images [n*n, C, S, S], row-major over grid_cells(spec). The varied
// level's latent is mu + (gx, gy); the other level stays at its drift.
Tensor perturbation_grid(AceModel& model, const GridSpec& spec, const ObservationDrift& drift, std::size_t cls);

// Linear path z(t) = (1 - t) mu_a + t mu_b at both levels, t = k / (steps - 1):
// [steps, C, S, S]. Both observations must share `cls_a == cls_b`.
Tensor interpolate(AceModel& model, const ObservationDrift& a, std::size_t cls_a, const ObservationDrift& b,
                   std::size_t cls_b, std::size_t steps);

// perturbation_grid around mu = 0 at both levels.
Tensor zero_drift_baseline(AceModel& model, const GridSpec& spec, std::size_t cls);

}  // namespace ace
