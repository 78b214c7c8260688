#include "vemnn/quadrature.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>

namespace vemnn {

double QuadratureRule::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

namespace {

GaussRule1D compute_gauss_legendre(int n) {
  GaussRule1D r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1,1] -> [0,1], ascending order.
    r.nodes[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (x + 1.0);
    r.weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
  }
  return r;
}

constexpr int max_gauss_points = 64;

} // namespace

const GaussRule1D& gauss_legendre(int n) {
  static std::array<GaussRule1D, max_gauss_points + 1> cache;
  static std::once_flag once;
  std::call_once(once, [] {
    for (int k = 1; k <= max_gauss_points; ++k) cache[static_cast<std::size_t>(k)] = compute_gauss_legendre(k);
  });
  if (n < 1 || n > max_gauss_points) throw Error("gauss_legendre: unsupported number of points");
  return cache[static_cast<std::size_t>(n)];
}

QuadratureRule triangle_rule(const Point& a, const Point& b, const Point& c, int degree, int graded_levels) {
  QuadratureRule rule;
  rule.exactness_degree = degree;
  const double area2 = std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
  // x(u,v) = a + u (b - a) + u v (c - b), Jacobian area2 * u.
  const int nu = std::max(1, (degree + 3) / 2);
  const int nv = std::max(1, (degree + 2) / 2);
  const auto& gu = gauss_legendre(nu);
  const auto& gv = gauss_legendre(nv);

  std::vector<std::pair<double, double>> intervals;
  if (graded_levels <= 0) {
    intervals.emplace_back(0.0, 1.0);
  } else {
    double hi = 1.0;
    for (int l = 0; l < graded_levels; ++l) {
      intervals.emplace_back(0.5 * hi, hi);
      hi *= 0.5;
    }
    intervals.emplace_back(0.0, hi);
  }
  rule.nodes.reserve(intervals.size() * static_cast<std::size_t>(nu * nv));
  rule.weights.reserve(rule.nodes.capacity());
  for (const auto& [lo, hi] : intervals) {
    const double len = hi - lo;
    for (int i = 0; i < nu; ++i) {
      const double u = lo + len * gu.nodes[static_cast<std::size_t>(i)];
      const double wu = len * gu.weights[static_cast<std::size_t>(i)];
      for (int j = 0; j < nv; ++j) {
        const double v = gv.nodes[static_cast<std::size_t>(j)];
        rule.nodes.push_back(a + u * (b - a) + u * v * (c - b));
        rule.weights.push_back(area2 * u * wu * gv.weights[static_cast<std::size_t>(j)]);
      }
    }
  }
  return rule;
}

namespace {

void append(QuadratureRule& into, const QuadratureRule& from) {
  into.nodes.insert(into.nodes.end(), from.nodes.begin(), from.nodes.end());
  into.weights.insert(into.weights.end(), from.weights.begin(), from.weights.end());
}

double cross2(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

} // namespace

QuadratureRule polygon_rule(std::span<const Point> loop, const ElementGeometry& geometry, int degree) {
  QuadratureRule rule;
  rule.exactness_degree = degree;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = loop[i];
    const Point& q = loop[(i + 1) % n];
    if (cross2(p - geometry.centroid, q - geometry.centroid) <= 0.0)
      throw ElementError("polygon_rule: cell is not star-shaped about its centroid; sub-triangulate it first");
    append(rule, triangle_rule(geometry.centroid, p, q, degree));
  }
  return rule;
}

QuadratureRule polygon_rule(const PolygonalMesh& mesh, int cell, int degree) {
  std::vector<Point> loop;
  for (int v : mesh.cell(cell)) loop.push_back(mesh.vertex(v));
  return polygon_rule(loop, mesh.geometry(cell), degree);
}

QuadratureRule singular_polygon_rule(std::span<const Point> loop, const ElementGeometry& geometry, int degree,
                                     const Point& singular_point, int graded_levels) {
  const std::size_t n = loop.size();
  const double tol = 1e-12 * geometry.diameter * geometry.diameter;
  bool inside = true;
  for (std::size_t i = 0; i < n; ++i)
    if (cross2(loop[(i + 1) % n] - loop[i], singular_point - loop[i]) < -tol) inside = false;
  if (!inside) return polygon_rule(loop, geometry, degree);
  QuadratureRule rule;
  rule.exactness_degree = degree;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = loop[i];
    const Point& q = loop[(i + 1) % n];
    if (cross2(p - singular_point, q - singular_point) <= tol) continue;
    append(rule, triangle_rule(singular_point, p, q, degree, graded_levels));
  }
  return rule;
}

QuadratureRule edge_rule(const Point& a, const Point& b, int degree) {
  QuadratureRule rule;
  rule.exactness_degree = degree;
  const int np = std::max(1, (degree + 2) / 2);
  const auto& g = gauss_legendre(np);
  const double len = (b - a).norm();
  for (int i = 0; i < np; ++i) {
    rule.nodes.push_back(a + g.nodes[static_cast<std::size_t>(i)] * (b - a));
    rule.weights.push_back(len * g.weights[static_cast<std::size_t>(i)]);
  }
  return rule;
}

} // namespace vemnn
