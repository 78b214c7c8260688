#pragma once

#include "vemnn/constitutive.hpp"
#include "vemnn/element.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>

namespace vemnn {

class Discretization;

/// Manufactured velocity/pressure pair. grad_u(x)(i, j) = d_j u_i and
/// hess_u(x)[i](j, l) = d_j d_l u_i.
struct ExactSolution {
  std::string name;
  int test = 0;
  Box domain;
  VectorField u;
  std::function<Eigen::Matrix2d(const Point&)> grad_u;
  std::function<std::array<Eigen::Matrix2d, 2>(const Point&)> hess_u;
  ScalarField p;
  std::function<Eigen::Vector2d(const Point&)> grad_p;
  bool zero_pressure = false;
  /// Where derivatives blow up, if anywhere; integrals near it use graded rules.
  std::optional<Point> singular_point;

  Eigen::Matrix2d eps(const Point& x) const {
    const Eigen::Matrix2d g = grad_u(x);
    return 0.5 * (g + g.transpose());
  }
};

/// Tests 1-3 on their reference domains. For test 3 the pressure constant
/// depends on the mesh; see with_zero_mean_pressure.
ExactSolution make_exact_solution(int test, double r);

/// Shifts the pressure so that its integral over the mesh vanishes, using the
/// same quadrature as the error computation.
ExactSolution with_zero_mean_pressure(const ExactSolution& exact, const Discretization& disc, int degree = 9);

/// f = -div sigma(x, eps(u)) + grad p evaluated through the chain rule.
Eigen::Vector2d manufactured_forcing(const ExactSolution& exact, const RheologyParams& params, const Point& x);

VectorField forcing_field(const ExactSolution& exact, const RheologyParams& params);

} // namespace vemnn
