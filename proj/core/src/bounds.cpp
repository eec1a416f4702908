#include "tamper/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tamper {
namespace bounds {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

void require_mu_rho(double mu, double rho) {
  if (!(mu > 0.0 && mu < rho && rho < 1.0))
    throw std::invalid_argument("bounds: need 0 < mu < rho < 1");
}

}  // namespace

double azuma_approx_bound(uint32_t n, double tau, double gamma, double s) {
  if (n < 1 || !(tau > 0.0) || gamma < 0.0)
    throw std::invalid_argument("azuma_approx_bound: bad parameters");
  double slack = static_cast<double>(n) * gamma;
  if (s <= slack) return 1.0;
  double dev = s - slack;
  double width = tau + gamma;
  double tail = std::exp(-(dev * dev) / (2.0 * n * width * width));
  return clamp01(tail + slack);
}

double bias_lower_bound(uint32_t n, double mu, double tau, double gamma,
                        BiasExponent variant) {
  if (!(mu > 0.0 && mu <= 1.0))
    throw std::invalid_argument("bias_lower_bound: mu must lie in (0,1]");
  if (n < 1 || !(tau > 0.0) || gamma < 0.0)
    throw std::invalid_argument("bias_lower_bound: bad parameters");
  double c = variant == BiasExponent::kStatement ? 2.0 : 3.0;
  double num = mu - c * n * gamma;
  if (num <= 0.0) return 0.0;
  double width = tau + 4.0 * gamma;
  double tail = std::exp(-(num * num) / (2.0 * n * width * width));
  return clamp01(1.0 - tail - 4.0 * n * gamma);
}

double budget_upper_bound(uint32_t n, double mu, double tau, double gamma) {
  if (!(mu >= 0.0 && mu <= 1.0) || n < 1 || gamma < 0.0)
    throw std::invalid_argument("budget_upper_bound: bad parameters");
  if (!(tau > 2.0 * gamma))
    throw std::invalid_argument("budget_upper_bound: requires tau > 2*gamma");
  double b = (1.0 - mu + n * gamma) / (tau - 2.0 * gamma) +
             3.0 * static_cast<double>(n) * n * gamma;
  return std::clamp(b, 0.0, static_cast<double>(n));
}

double theorem_budget(uint32_t n, double mu, double rho) {
  require_mu_rho(mu, rho);
  return (2.0 / mu) * std::sqrt(n * std::log(2.0 / (1.0 - rho)));
}

double confidence_budget(uint32_t m, double mu, double rho) {
  require_mu_rho(mu, rho);
  return (2.0 / (1.0 - rho)) * std::sqrt(m * std::log(2.0 / mu));
}

double ideal_bias_bound(uint32_t n, double mu, double tau) {
  return bias_lower_bound(n, mu, tau, 0.0);
}

double ideal_budget_bound(uint32_t n, double mu, double tau) {
  return budget_upper_bound(n, mu, tau, 0.0);
}

}  // namespace bounds
}  // namespace tamper
