#include "vemnn/constitutive.hpp"

#include <algorithm>
#include <cmath>

namespace vemnn {

RheologyParams RheologyParams::constant_viscosity(double mu, double r, double delta, double alpha) {
  RheologyParams p;
  p.mu = [mu](const Point&) { return mu; };
  p.mu_minus = mu;
  p.mu_plus = mu;
  p.r = r;
  p.delta = delta;
  p.alpha = alpha;
  return p;
}

void RheologyParams::check() const {
  if (!(r >= 2.0)) throw UsageError("power-law index r must be >= 2");
  if (!(delta >= 0.0)) throw UsageError("delta must be >= 0");
  if (!(alpha > 0.0)) throw UsageError("alpha must be > 0");
  if (!(mu_minus > 0.0) || !(mu_plus >= mu_minus)) throw UsageError("viscosity bounds must satisfy 0 < mu- <= mu+");
  if (!mu) throw UsageError("viscosity field is empty");
}

double effective_viscosity(double s, double mu, const RheologyParams& params) {
  if (params.r == 2.0) return mu;
  const double base = std::pow(params.delta, params.alpha) + std::pow(s, params.alpha);
  if (base == 0.0) return 0.0;
  return mu * std::pow(base, (params.r - 2.0) / params.alpha);
}

double effective_viscosity_derivative(double s, double mu, const RheologyParams& params) {
  if (params.r == 2.0 || s == 0.0) return 0.0;
  const double a = params.alpha;
  const double base = std::pow(params.delta, a) + std::pow(s, a);
  return mu * (params.r - 2.0) * std::pow(s, a - 1.0) * std::pow(base, (params.r - 2.0) / a - 1.0);
}

Tensor2 stress(const Tensor2& eps, const Point& x, const RheologyParams& params) {
  return effective_viscosity(eps.norm(), params.mu(x), params) * eps;
}

AssumptionConstants assumption_constants(const RheologyParams& params) {
  const double r = params.r;
  const double xi = 1.0 / params.alpha - 1.0 / r;
  const double xi_plus = std::max(0.0, xi);
  const double xi_minus = -std::min(0.0, xi);
  AssumptionConstants c;
  c.sigma_c = params.mu_plus * (r - 1.0) * std::pow(2.0, xi_plus * (r - 2.0));
  c.sigma_m = params.mu_minus / (r - 1.0) * std::pow(2.0, (-xi_minus - 1.0) * (r - 2.0) - 1.0);
  return c;
}

} // namespace vemnn
