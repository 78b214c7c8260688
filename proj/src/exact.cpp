#include "vemnn/exact.hpp"

#include "vemnn/assembly.hpp"

#include <cmath>
#include <numbers>

namespace vemnn {

namespace {

using Hessian = std::array<Eigen::Matrix2d, 2>;

ExactSolution trigonometric() {
  constexpr double k = std::numbers::pi / 2.0;
  ExactSolution e;
  e.name = "trigonometric";
  e.test = 1;
  e.domain = Box{0.0, 1.0, 0.0, 1.0};
  e.u = [](const Point& x) {
    return Eigen::Vector2d(std::sin(k * x.x()) * std::cos(k * x.y()), -std::cos(k * x.x()) * std::sin(k * x.y()));
  };
  e.grad_u = [](const Point& x) {
    const double sx = std::sin(k * x.x()), cx = std::cos(k * x.x());
    const double sy = std::sin(k * x.y()), cy = std::cos(k * x.y());
    Eigen::Matrix2d g;
    g << k * cx * cy, -k * sx * sy, k * sx * sy, -k * cx * cy;
    return g;
  };
  e.hess_u = [](const Point& x) {
    const double sx = std::sin(k * x.x()), cx = std::cos(k * x.x());
    const double sy = std::sin(k * x.y()), cy = std::cos(k * x.y());
    const double k2 = k * k;
    Hessian h;
    h[0] << -k2 * sx * cy, -k2 * cx * sy, -k2 * cx * sy, -k2 * sx * cy;
    h[1] << k2 * cx * sy, k2 * sx * cy, k2 * sx * cy, k2 * cx * sy;
    return h;
  };
  // sin sin has mean (2/pi)^2 on the unit square.
  e.p = [](const Point& x) { return -std::sin(k * x.x()) * std::sin(k * x.y()) + 4.0 / (std::numbers::pi * std::numbers::pi); };
  e.grad_p = [](const Point& x) {
    return Eigen::Vector2d(-k * std::cos(k * x.x()) * std::sin(k * x.y()), -k * std::sin(k * x.x()) * std::cos(k * x.y()));
  };
  return e;
}

ExactSolution polynomial() {
  ExactSolution e;
  e.name = "polynomial";
  e.test = 2;
  e.domain = Box{0.0, 1.0, 0.0, 1.0};
  e.u = [](const Point& x) {
    const double a = x.x(), b = x.y();
    return Eigen::Vector2d(a * a + b * b + 3 * a + 5, -2 * a * b - a * a - 3 * b + 7);
  };
  e.grad_u = [](const Point& x) {
    const double a = x.x(), b = x.y();
    Eigen::Matrix2d g;
    g << 2 * a + 3, 2 * b, -2 * b - 2 * a, -2 * a - 3;
    return g;
  };
  e.hess_u = [](const Point&) {
    Hessian h;
    h[0] << 2, 0, 0, 2;
    h[1] << -2, -2, -2, 0;
    return h;
  };
  e.p = [](const Point&) { return 0.0; };
  e.grad_p = [](const Point&) { return Eigen::Vector2d::Zero().eval(); };
  e.zero_pressure = true;
  return e;
}

ExactSolution singular(double r) {
  constexpr double a = 0.01;
  const double gamma = 2.0 / r - 1.0 + 0.01;
  // Guard against evaluation exactly at the singular point.
  auto guard = [](const Point& x) { return x.norm() > 0.0 ? x : Point(1e-300, 0.0); };
  ExactSolution e;
  e.name = "singular";
  e.test = 3;
  e.domain = Box{-1.0, 1.0, -1.0, 1.0};
  e.singular_point = Point(0.0, 0.0);
  e.u = [](const Point& x) { return (std::pow(x.norm(), a) * Eigen::Vector2d(x.y(), -x.x())).eval(); };
  e.grad_u = [guard](const Point& xin) {
    const Point x = guard(xin);
    const double rho = x.norm();
    const Eigen::Vector2d w(x.y(), -x.x());
    Eigen::Matrix2d rot;
    rot << 0, 1, -1, 0;
    return (a * std::pow(rho, a - 2) * w * x.transpose() + std::pow(rho, a) * rot).eval();
  };
  e.hess_u = [guard](const Point& xin) {
    const Point x = guard(xin);
    const double rho = x.norm();
    const Eigen::Vector2d w(x.y(), -x.x());
    Eigen::Matrix2d rot;
    rot << 0, 1, -1, 0;
    const double c1 = a * (a - 2) * std::pow(rho, a - 4);
    const double c2 = a * std::pow(rho, a - 2);
    Hessian h;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l)
          h[static_cast<std::size_t>(i)](j, l) = c1 * w(i) * x(j) * x(l) +
                                                 c2 * ((j == l ? w(i) : 0.0) + rot(i, l) * x(j) + rot(i, j) * x(l));
    return h;
  };
  e.p = [gamma](const Point& x) { return -std::pow(x.norm(), gamma); };
  e.grad_p = [gamma, guard](const Point& xin) {
    const Point x = guard(xin);
    return (-gamma * std::pow(x.norm(), gamma - 2) * x).eval();
  };
  return e;
}

} // namespace

ExactSolution make_exact_solution(int test, double r) {
  switch (test) {
  case 1: return trigonometric();
  case 2: return polynomial();
  case 3: return singular(r);
  default: throw UsageError("unknown test id " + std::to_string(test) + " (expected 1, 2 or 3)");
  }
}

ExactSolution with_zero_mean_pressure(const ExactSolution& exact, const Discretization& disc, int degree) {
  LoadOptions opt;
  opt.degree = degree;
  opt.singular_point = exact.singular_point;
  double integral = 0.0;
  double area = 0.0;
  for (int c = 0; c < disc.num_cells(); ++c) {
    const QuadratureRule rule = cell_rule(disc, c, opt);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      integral += rule.weights[q] * exact.p(rule.nodes[q]);
      area += rule.weights[q];
    }
  }
  const double shift = integral / area;
  ExactSolution out = exact;
  const ScalarField p = exact.p;
  out.p = [p, shift](const Point& x) { return p(x) - shift; };
  return out;
}

Eigen::Vector2d manufactured_forcing(const ExactSolution& exact, const RheologyParams& params, const Point& x) {
  const Eigen::Matrix2d eps = exact.eps(x);
  const Hessian h = exact.hess_u(x);
  const double s = eps.norm();
  const double mu = params.mu(x);
  const double nu = effective_viscosity(s, mu, params);
  const double dnu = effective_viscosity_derivative(s, mu, params);
  Eigen::Vector2d div = Eigen::Vector2d::Zero();
  for (int j = 0; j < 2; ++j) {
    // (d_j eps)_{ik} = (d_j d_k u_i + d_j d_i u_k) / 2
    Eigen::Matrix2d deps;
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k)
        deps(i, k) = 0.5 * (h[static_cast<std::size_t>(i)](j, k) + h[static_cast<std::size_t>(k)](j, i));
    const double ds = s > 0.0 ? (eps.array() * deps.array()).sum() / s : 0.0;
    for (int i = 0; i < 2; ++i) div(i) += dnu * ds * eps(i, j) + nu * deps(i, j);
  }
  return -div + exact.grad_p(x);
}

VectorField forcing_field(const ExactSolution& exact, const RheologyParams& params) {
  return [exact, params](const Point& x) { return manufactured_forcing(exact, params, x); };
}

} // namespace vemnn
