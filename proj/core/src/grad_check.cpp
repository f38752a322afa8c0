#include "ace/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ace {

namespace {

double eval_value(const std::function<Tensor()>& loss) {
    NoGradGuard guard;
    return loss().item();
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor()>& loss, ParameterSet& params,
                           const GradCheckOptions& opt) {
    params.zero_grad();
    loss().backward();
    std::vector<std::vector<double>> analytic;
    for (const auto& p : params) {
        auto g = p.tensor.grad();
        if (g.empty()) {
            analytic.emplace_back(p.tensor.size(), 0.0);
        } else {
            analytic.emplace_back(g.begin(), g.end());
        }
    }

    GradCheckReport report;
    const double h = opt.step;
    const double f0 = eval_value(loss);
    std::size_t pi = 0;
    for (auto& p : params) {
        auto values = p.tensor.mutable_values();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double orig = values[i];
            values[i] = orig + h;
            const double fp = eval_value(loss);
            values[i] = orig - h;
            const double fm = eval_value(loss);
            values[i] = orig;

            GradCheckEntry e;
            e.name = p.name;
            e.index = i;
            e.analytic = analytic[pi][i];
            e.numeric = (fp - fm) / (2.0 * h);
            e.forward_slope = (fp - f0) / h;
            e.backward_slope = (f0 - fm) / h;
            const double scale = std::max({std::abs(e.analytic), std::abs(e.numeric), opt.scale_floor});
            const double one_sided_gap = std::abs(e.forward_slope - e.backward_slope);
            const double slope_scale = std::max({std::abs(e.forward_slope), std::abs(e.backward_slope),
                                                 opt.scale_floor});
            e.kink = one_sided_gap > opt.kink_threshold * slope_scale;
            if (e.kink) {
                const double lo = std::min(e.forward_slope, e.backward_slope);
                const double hi = std::max(e.forward_slope, e.backward_slope);
                const double outside = e.analytic < lo ? lo - e.analytic : (e.analytic > hi ? e.analytic - hi : 0.0);
                e.rel_error = outside / scale;
                ++report.kinks;
            } else {
                e.rel_error = std::abs(e.analytic - e.numeric) / scale;
            }
            ++report.checked;
            if (report.checked == 1 || e.rel_error > report.max_rel_error) {
                report.max_rel_error = e.rel_error;
                report.worst = e;
            }
            if (!(e.rel_error <= opt.tolerance)) report.failures.push_back(e);
        }
        ++pi;
    }
    return report;
}

GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& point,
                           const GradCheckOptions& options) {
    auto values = point.values();
    Tensor x(point.shape(), std::vector<double>(values.begin(), values.end()), true);
    ParameterSet params;
    params.add("x", x);
    return grad_check([&] { return f(x); }, params, options);
}

}  // namespace ace
