#pragma once

#include "vemnn/mesh.hpp"

#include <Eigen/Core>

#include <functional>

namespace vemnn {

using Tensor2 = Eigen::Matrix2d;

/// Carreau-Yasuda law sigma = mu(x) (delta^alpha + |eps|^alpha)^((r-2)/alpha) eps.
struct RheologyParams {
  std::function<double(const Point&)> mu = [](const Point&) { return 1.0; };
  double mu_minus = 1.0;  // bounds of mu over the domain
  double mu_plus = 1.0;
  double alpha = 2.0;
  double delta = 1.0;
  double r = 2.0;

  static RheologyParams constant_viscosity(double mu, double r, double delta, double alpha = 2.0);

  /// Throws UsageError when r < 2, delta < 0, alpha <= 0 or the mu bounds are invalid.
  void check() const;
};

struct AssumptionConstants {
  double sigma_c = 0.0;
  double sigma_m = 0.0;
};

/// nu(s) = mu (delta^alpha + s^alpha)^((r-2)/alpha), for a given mu value.
double effective_viscosity(double s, double mu, const RheologyParams& params);

/// d nu / d s. The s = 0 limit is returned as 0 whenever alpha >= 1 and r >= 2.
double effective_viscosity_derivative(double s, double mu, const RheologyParams& params);

/// sigma(x, eps) with |eps| the Frobenius norm.
Tensor2 stress(const Tensor2& eps, const Point& x, const RheologyParams& params);

AssumptionConstants assumption_constants(const RheologyParams& params);

} // namespace vemnn
