#pragma once

#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace ace::laplace {

// Scale of the unit-variance Laplace density: Var = 2 b^2 = 1.
inline constexpr double kUnitScale = std::numbers::sqrt2 / 2.0;

// Location/scale of p(z; mu, b) = exp(-|z - mu| / b) / (2 b).
struct LaplaceParams {
    double mu = 0.0;
    double b = kUnitScale;
};

// Latent head parametrisation: scale b = sigma * sqrt(0.5), so (0, 1) is the
// unit-variance prior.
struct PosteriorParams {
    double mu = 0.0;
    double sigma = 1.0;

    LaplaceParams density() const { return {mu, sigma * kUnitScale}; }
};

PosteriorParams prior();

double density(double z, const LaplaceParams& p);
double log_density(double z, const LaplaceParams& p);
double cdf(double z, const LaplaceParams& p);

// Standard variate s(u) = -sign(u - 1/2) ln(1 - 2|u - 1/2|), u in (0, 1).
double standard_variate(double u);
// z = mu + b s(u). Affine in (mu, b): dz/dmu = 1, dz/db = s(u).
double sample(double u, const LaplaceParams& p);

// Closed-form generative error between the posterior (mu1, sigma1) and the
// generation-time target (mu2, sigma2):
//
//   -ln(s2/s1) + |mu1 - mu2| / (sqrt(0.5) s2)
//       + (s1/s2) exp(-|mu1 - mu2| / (s1 sqrt(0.5))) - 1
//
// Note the sign of the log term: the exact KL divergence between the two
// densities has +ln(s2/s1). The two agree when s1 == s2; see
// kl_divergence_quadrature and discrepancy_report.
double generative_error(const PosteriorParams& posterior, const PosteriorParams& target);

struct GenerativeErrorGrad {
    double d_mu = 0.0;     // d/d mu1; continuous, 0 at mu1 == mu2
    double d_sigma = 0.0;  // d/d sigma1
};
GenerativeErrorGrad generative_error_grad(const PosteriorParams& posterior,
                                          const PosteriorParams& target);

// Adaptive composite Simpson on [a, b] to absolute tolerance `tol`.
double integrate(const std::function<double(double)>& f, double a, double b, double tol);

// D(Lap(mu1, s1 sqrt(.5)) || Lap(mu2, s2 sqrt(.5))) by quadrature over
// [min mu - 40 max b, max mu + 40 max b], split at both locations.
double kl_divergence_quadrature(const PosteriorParams& p, const PosteriorParams& q,
                                double tol = 1e-9);

struct DiscrepancyRow {
    PosteriorParams posterior;
    PosteriorParams target;
    double closed_form = 0.0;
    double quadrature = 0.0;
    double difference() const { return closed_form - quadrature; }
};

// Every (mu1, sigma1, mu2, sigma2) combination of the given axis values.
std::vector<DiscrepancyRow> discrepancy_report(std::span<const double> mus,
                                               std::span<const double> sigmas,
                                               double tol = 1e-9);

}  // namespace ace::laplace
