#include "vemnn/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vemnn;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

double integrate(const QuadratureRule& rule, const std::function<double(const Point&)>& f) {
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * f(rule.nodes[q]);
  return s;
}

} // namespace

TEST(Quadrature, GaussLegendreExactness) {
  for (int n = 1; n <= 10; ++n) {
    const GaussRule1D& g = gauss_legendre(n);
    ASSERT_EQ(g.nodes.size(), static_cast<std::size_t>(n));
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += g.weights[static_cast<std::size_t>(i)] * std::pow(g.nodes[static_cast<std::size_t>(i)], d);
      EXPECT_NEAR(s, 1.0 / (d + 1), 1e-14) << "n=" << n << " d=" << d;
    }
  }
}

TEST(Quadrature, ReferenceTriangleMonomials) {
  // int_T x^a y^b over the unit right triangle is a! b! / (a + b + 2)!.
  for (int degree = 0; degree <= 12; ++degree) {
    const QuadratureRule rule = triangle_rule({0, 0}, {1, 0}, {0, 1}, degree);
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) {
        const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        const double approx = integrate(rule, [&](const Point& x) { return std::pow(x.x(), a) * std::pow(x.y(), b); });
        EXPECT_NEAR(approx, exact, 1e-15) << "degree " << degree << " a=" << a << " b=" << b;
      }
  }
}

TEST(Quadrature, PolygonRuleAgainstShoelaceMoments) {
  // Area and first moments of a pentagon from the shoelace formulas.
  const std::vector<Point> loop{{0, 0}, {1.2, 0.1}, {1.5, 0.9}, {0.6, 1.4}, {-0.2, 0.8}};
  double area = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Point& p = loop[i];
    const Point& q = loop[(i + 1) % loop.size()];
    const double cr = p.x() * q.y() - q.x() * p.y();
    area += cr / 2;
    mx += (p.x() + q.x()) * cr / 6;
    my += (p.y() + q.y()) * cr / 6;
  }
  const ElementGeometry geo = compute_element_geometry(loop);
  EXPECT_NEAR(geo.area, area, 1e-15);
  EXPECT_NEAR(geo.centroid.x(), mx / area, 1e-15);
  EXPECT_NEAR(geo.centroid.y(), my / area, 1e-15);
  const QuadratureRule rule = polygon_rule(loop, geo, 4);
  EXPECT_NEAR(rule.total_weight(), area, 1e-14);
  EXPECT_NEAR(integrate(rule, [](const Point& x) { return x.x(); }), mx, 1e-14);
  EXPECT_NEAR(integrate(rule, [](const Point& x) { return x.y(); }), my, 1e-14);
}

TEST(Quadrature, GradedRuleIntegratesInverseDistance) {
  // int over the unit square of 1/|x| with the singularity at a corner is
  // 2 ln(1 + sqrt 2) (polar coordinates on the two halves). The radial factor
  // is exact after the Duffy map; the degree resolves the angular factor.
  const std::vector<Point> loop{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const ElementGeometry geo = compute_element_geometry(loop);
  const QuadratureRule rule = singular_polygon_rule(loop, geo, 20, Point(0, 0));
  const double approx = integrate(rule, [](const Point& x) { return 1.0 / x.norm(); });
  EXPECT_NEAR(approx, 2.0 * std::log(1.0 + std::sqrt(2.0)), 1e-10);
  EXPECT_NEAR(rule.total_weight(), 1.0, 1e-14);
}

TEST(Quadrature, EdgeRule) {
  const QuadratureRule rule = edge_rule({0, 0}, {3, 4}, 5);
  EXPECT_NEAR(rule.total_weight(), 5.0, 1e-14);
  // int_0^5 (s/5 * 3)^5 ds with x = 3 s / 5.
  EXPECT_NEAR(integrate(rule, [](const Point& x) { return std::pow(x.x(), 5); }), 5.0 * std::pow(3.0, 5) / 6.0, 1e-11);
}

TEST(Quadrature, NonStarShapedCellIsRejected) {
  // Thin comb: the centroid sees a reflex corner from outside.
  const std::vector<Point> loop{{0, 0}, {4, 0}, {4, 1}, {3, 1}, {3, 0.1}, {1, 0.1}, {1, 3}, {0, 3}};
  EXPECT_THROW(polygon_rule(loop, compute_element_geometry(loop), 2), ElementError);
}
