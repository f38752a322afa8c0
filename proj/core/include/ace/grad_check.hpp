#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "ace/parameters.hpp"

namespace ace {

struct GradCheckOptions {
    double step = 1e-5;
    double tolerance = 1e-4;
    // Relative errors are taken against max(|analytic|, |numeric|, scale_floor)
    // so that gradients that vanish analytically are compared absolutely.
    double scale_floor = 1e-3;
    // One-sided slopes disagreeing by more than this fraction of their scale
    // mark a non-differentiable point.
    double kink_threshold = 1e-2;
};

struct GradCheckEntry {
    std::string name;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;  // central difference
    double forward_slope = 0.0;
    double backward_slope = 0.0;
    double rel_error = 0.0;
    // At a kink the analytic value is judged against the interval spanned by
    // the one-sided slopes (a subgradient) instead of the central difference.
    bool kink = false;
};

struct GradCheckReport {
    std::size_t checked = 0;
    std::size_t kinks = 0;
    double max_rel_error = 0.0;
    GradCheckEntry worst;
    std::vector<GradCheckEntry> failures;
    bool passed() const { return failures.empty(); }
};

// Compares the tape gradient of a scalar loss with respect to every value in
// `params` against finite differences. `loss` must rebuild the graph from the
// current parameter values on each call.
GradCheckReport grad_check(const std::function<Tensor()>& loss, ParameterSet& params,
                           const GradCheckOptions& options = {});

// Convenience for a function of a single input tensor at `point`.
GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& point,
                           const GradCheckOptions& options = {});

}  // namespace ace
