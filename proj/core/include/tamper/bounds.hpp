#pragma once

#include <cstdint>

namespace tamper {
namespace bounds {

/// Tail bound for near-martingales whose steps are tau-bounded and have
/// conditionally nonnegative mean, both only up to slack gamma:
/// P[sum <= -s] <= exp(-(s - n*gamma)^2 / (2n*(tau+gamma)^2)) + n*gamma,
/// clamped to [0,1]; returns 1 when s <= n*gamma. gamma = 0 recovers the
/// standard Azuma-Hoeffding form.
double azuma_approx_bound(uint32_t n, double tau, double gamma, double s);

enum class BiasExponent {
  kStatement,  // (mu - 2*n*gamma)^2 numerator
  kProof,      // (mu - 3*n*gamma)^2 numerator (weaker; the default)
};

/// Guaranteed post-attack mean:
/// max(0, 1 - exp(-(mu - c*n*gamma)^2 / (2n*(tau+4gamma)^2)) - 4n*gamma).
/// gamma = 0 reduces to 1 - exp(-mu^2/(2n*tau^2)).
double bias_lower_bound(uint32_t n, double mu, double tau, double gamma,
                        BiasExponent variant = BiasExponent::kProof);

/// Expected number of tampered blocks:
/// (1 - mu + n*gamma)/(tau - 2*gamma) + 3*n^2*gamma, clamped to [0,n].
/// Requires tau > 2*gamma. gamma = 0 reduces to (1-mu)/tau.
double budget_upper_bound(uint32_t n, double mu, double tau, double gamma);

/// The headline average tampering budget driving the mean from mu to rho:
/// (2/mu) * sqrt(n * ln(2/(1-rho))). Requires 0 < mu < rho < 1.
double theorem_budget(uint32_t n, double mu, double rho);

/// Budget of the confidence-reduction poisoning attack:
/// (2/(1-rho)) * sqrt(m * ln(2/mu)). Requires 0 < mu < rho < 1.
double confidence_budget(uint32_t m, double mu, double rho);

/// gamma = 0 specializations used against the exact-oracle attack.
double ideal_bias_bound(uint32_t n, double mu, double tau);
double ideal_budget_bound(uint32_t n, double mu, double tau);

}  // namespace bounds
}  // namespace tamper
