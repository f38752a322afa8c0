#pragma once

#include <cstdint>
#include <vector>

#include "ace/parameters.hpp"

namespace ace {

struct AdamConfig {
    double learning_rate = 1e-3;
    // The rate halves every this many epochs.
    double half_decay_epochs = 100.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    std::uint64_t step = 0;
    // One moment buffer per parameter, in ParameterSet order.
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    // lr(epoch) = lr0 * 2^(-epoch / half_decay_epochs)
    double rate(double epoch) const;
};

// One bias-corrected Adam update over every parameter in `params`, using the
// gradients accumulated on them. All gradients are validated before any
// value changes; a non-finite entry throws NumericError naming the parameter.
void adam_step(ParameterSet& params, AdamState& state, double epoch);

}  // namespace ace
