#include "ace/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ace::laplace {

namespace {

void require_scale(double b, const char* what) {
    if (!(b > 0.0) || !std::isfinite(b)) {
        throw std::invalid_argument(std::string(what) + " must be positive and finite, got " +
                                    std::to_string(b));
    }
}

void require(const PosteriorParams& p) { require_scale(p.sigma, "sigma"); }

double simpson(double fa, double fm, double fb, double width) {
    return width / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double b, double fa, double fm,
             double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

PosteriorParams prior() { return {0.0, 1.0}; }

double density(double z, const LaplaceParams& p) { return std::exp(log_density(z, p)); }

double log_density(double z, const LaplaceParams& p) {
    require_scale(p.b, "Laplace scale");
    return -std::abs(z - p.mu) / p.b - std::log(2.0 * p.b);
}

double cdf(double z, const LaplaceParams& p) {
    require_scale(p.b, "Laplace scale");
    const double t = (z - p.mu) / p.b;
    return t < 0 ? 0.5 * std::exp(t) : 1.0 - 0.5 * std::exp(-t);
}

double standard_variate(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw std::invalid_argument("uniform draw must lie in (0,1), got " + std::to_string(u));
    }
    const double c = u - 0.5;
    if (c == 0.0) return 0.0;
    const double mag = -std::log1p(-2.0 * std::abs(c));
    return c > 0 ? mag : -mag;
}

double sample(double u, const LaplaceParams& p) {
    require_scale(p.b, "Laplace scale");
    return p.mu + p.b * standard_variate(u);
}

double generative_error(const PosteriorParams& post, const PosteriorParams& target) {
    require(post);
    require(target);
    const double gap = std::abs(post.mu - target.mu);
    const double ratio = post.sigma / target.sigma;
    return -std::log(target.sigma / post.sigma) + gap / (kUnitScale * target.sigma) +
           ratio * std::exp(-gap / (post.sigma * kUnitScale)) - 1.0;
}

GenerativeErrorGrad generative_error_grad(const PosteriorParams& post, const PosteriorParams& target) {
    require(post);
    require(target);
    const double d = post.mu - target.mu;
    const double gap = std::abs(d);
    const double sign = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
    const double decay = std::exp(-gap / (post.sigma * kUnitScale));
    GenerativeErrorGrad g;
    g.d_mu = sign / (kUnitScale * target.sigma) * (1.0 - decay);
    g.d_sigma = 1.0 / post.sigma + decay / target.sigma * (1.0 + gap / (kUnitScale * post.sigma));
    return g;
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return adapt(f, a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 60);
}

double kl_divergence_quadrature(const PosteriorParams& p, const PosteriorParams& q, double tol) {
    require(p);
    require(q);
    const LaplaceParams dp = p.density();
    const LaplaceParams dq = q.density();
    const double reach = 40.0 * std::max(dp.b, dq.b);
    std::vector<double> cuts = {std::min(p.mu, q.mu) - reach, p.mu, q.mu,
                                std::max(p.mu, q.mu) + reach};
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto integrand = [&](double z) {
        const double lp = log_density(z, dp);
        return std::exp(lp) * (lp - log_density(z, dq));
    };
    const double piece_tol = tol / static_cast<double>(cuts.size() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += integrate(integrand, cuts[i], cuts[i + 1], piece_tol);
    }
    return total;
}

std::vector<DiscrepancyRow> discrepancy_report(std::span<const double> mus,
                                               std::span<const double> sigmas, double tol) {
    std::vector<DiscrepancyRow> rows;
    for (double mu1 : mus) {
        for (double s1 : sigmas) {
            for (double mu2 : mus) {
                for (double s2 : sigmas) {
                    DiscrepancyRow r;
                    r.posterior = {mu1, s1};
                    r.target = {mu2, s2};
                    r.closed_form = generative_error(r.posterior, r.target);
                    r.quadrature = kl_divergence_quadrature(r.posterior, r.target, tol);
                    rows.push_back(r);
                }
            }
        }
    }
    return rows;
}

}  // namespace ace::laplace
