#include "ace/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "ace/errors.hpp"

namespace ace {

double AdamState::rate(double epoch) const {
    return config.learning_rate * std::exp2(-epoch / config.half_decay_epochs);
}

void adam_step(ParameterSet& params, AdamState& state, double epoch) {
    if (state.m.empty()) {
        for (const auto& p : params) {
            state.m.emplace_back(p.tensor.size(), 0.0);
            state.v.emplace_back(p.tensor.size(), 0.0);
        }
    }
    if (state.m.size() != params.size()) {
        throw std::invalid_argument("optimizer state tracks " + std::to_string(state.m.size()) +
                                    " parameters, model has " + std::to_string(params.size()));
    }
    std::size_t idx = 0;
    for (const auto& p : params) {
        if (state.m[idx].size() != p.tensor.size()) {
            throw std::invalid_argument("optimizer state shape mismatch for " + p.name);
        }
        for (double g : p.tensor.grad()) {
            if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter " + p.name);
        }
        ++idx;
    }

    ++state.step;
    const auto& c = state.config;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);
    const double lr = state.rate(epoch);

    idx = 0;
    for (auto& p : params) {
        auto grad = p.tensor.grad();
        auto& m = state.m[idx];
        auto& v = state.v[idx];
        ++idx;
        if (grad.empty()) continue;  // never touched by a backward pass
        auto value = p.tensor.mutable_values();
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double g = grad[i];
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
            const double mhat = m[i] / correction1;
            const double vhat = v[i] / correction2;
            value[i] -= lr * mhat / (std::sqrt(vhat) + c.epsilon);
        }
    }
}

}  // namespace ace
