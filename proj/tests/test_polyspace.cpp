#include "vemnn/polyspace.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace vemnn;

namespace {

Eigen::VectorXd random_poly(int degree, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::VectorXd c(poly_dim(degree));
  for (int i = 0; i < c.size(); ++i) c(i) = u(rng);
  return c;
}

// Reference evaluation straight from the exponents.
double eval_ref(const Eigen::VectorXd& c, const Point& center, double h, const Point& x) {
  const Point s = (x - center) / h;
  double v = 0.0;
  for (int i = 0; i < c.size(); ++i) {
    const auto [a, b] = monomial_exponent(i);
    v += c(i) * std::pow(s.x(), a) * std::pow(s.y(), b);
  }
  return v;
}

} // namespace

TEST(Polyspace, DimensionsAndOrdering) {
  EXPECT_EQ(poly_dim(-1), 0);
  EXPECT_EQ(poly_dim(0), 1);
  EXPECT_EQ(poly_dim(2), 6);
  EXPECT_EQ(poly_dim(3), 10);
  const std::array<std::array<int, 2>, 6> expect{{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}};
  for (int i = 0; i < 6; ++i) EXPECT_EQ(monomial_exponent(i), expect[static_cast<std::size_t>(i)]);
  for (int i = 0; i < poly_dim(6); ++i) {
    const auto [a, b] = monomial_exponent(i);
    EXPECT_EQ(monomial_index(a, b), i);
  }
}

TEST(Polyspace, EvaluationMatchesExponents) {
  std::mt19937 rng(1);
  const Point center(0.3, -0.2);
  const MonomialBasis basis(4, center, 0.7);
  const Eigen::VectorXd c = random_poly(4, rng);
  for (const Point x : {Point(0.1, 0.2), Point(-0.5, 0.4), Point(1.0, 1.0)})
    EXPECT_NEAR(basis.eval_poly(c, x), eval_ref(c, center, 0.7, x), 1e-13);
}

TEST(Polyspace, DerivativeMatchesFiniteDifference) {
  std::mt19937 rng(2);
  const Point center(0.5, 0.5);
  const double h = 0.4;
  const MonomialBasis basis(3, center, h);
  const Eigen::VectorXd c = random_poly(3, rng);
  const Point x(0.62, 0.41);
  const double eps = 1e-6;
  for (int dir = 0; dir < 2; ++dir) {
    Point d = Point::Zero();
    d(dir) = eps;
    const double fd = (eval_ref(c, center, h, x + d) - eval_ref(c, center, h, x - d)) / (2 * eps);
    EXPECT_NEAR(basis.eval_poly(basis.derivative_matrix(dir) * c, x), fd, 1e-7);
    EXPECT_NEAR((basis.eval_grad(x) * c)(dir), fd, 1e-7);
  }
}

TEST(Polyspace, LaplacianOfQuadratic) {
  const MonomialBasis basis(2, Point::Zero(), 2.0);
  // m_(2,0) + m_(0,2) = |x|^2 / 4, Laplacian 1.
  Eigen::VectorXd c = Eigen::VectorXd::Zero(6);
  c(3) = 1.0;
  c(5) = 1.0;
  const Eigen::VectorXd lap = basis.laplacian_matrix() * c;
  EXPECT_NEAR(lap(0), 1.0, 1e-14);
  EXPECT_NEAR(lap.tail(5).norm(), 0.0, 1e-14);
}

TEST(Polyspace, ProductMatchesPointwiseProduct) {
  std::mt19937 rng(3);
  const Point center(0.1, 0.2);
  const Eigen::VectorXd p = random_poly(2, rng), q = random_poly(3, rng);
  const Eigen::VectorXd pq = multiply_polys(p, 2, q, 3);
  ASSERT_EQ(pq.size(), poly_dim(5));
  for (const Point x : {Point(0.4, -0.3), Point(1.2, 0.8)})
    EXPECT_NEAR(eval_ref(pq, center, 0.5, x), eval_ref(p, center, 0.5, x) * eval_ref(q, center, 0.5, x), 1e-11);
}

TEST(Polyspace, VectorDecompositionIsABasisChange) {
  for (int n = 1; n <= 3; ++n) {
    const VectorPolyDecomposition d = decompose_vector_poly(n);
    EXPECT_EQ(d.num_gradient + d.num_rotational, 2 * poly_dim(n));
    EXPECT_EQ(d.num_gradient, poly_dim(n + 1) - 1);
    EXPECT_EQ(d.num_rotational, poly_dim(n - 1));
    const Eigen::MatrixXd id = d.inverse * d.generators;
    EXPECT_NEAR((id - Eigen::MatrixXd::Identity(id.rows(), id.cols())).norm(), 0.0, 1e-11);
  }
}

TEST(Polyspace, GradientGeneratorsAreCurlFreeAndRotationalOnesTangential) {
  const int n = 2;
  const VectorPolyDecomposition d = decompose_vector_poly(n);
  const MonomialBasis b(n, Point::Zero(), 1.0);
  const Eigen::MatrixXd dx = b.derivative_matrix(0), dy = b.derivative_matrix(1);
  const int m = poly_dim(n);
  const std::vector<Point> pts{{0.3, -0.7}, {1.2, 0.4}, {-0.5, 0.9}};
  for (int j = 0; j < d.generators.cols(); ++j) {
    const Eigen::VectorXd vx = d.generators.col(j).head(m), vy = d.generators.col(j).tail(m);
    if (j < d.num_gradient) {
      EXPECT_NEAR((dx * vy - dy * vx).norm(), 0.0, 1e-12) << "generator " << j;
    } else {
      // x_perp m is orthogonal to x at every point.
      for (const Point& x : pts) {
        const Eigen::VectorXd e = b.eval(x);
        EXPECT_NEAR(x.x() * e.dot(vx) + x.y() * e.dot(vy), 0.0, 1e-12) << "generator " << j;
      }
    }
  }
}
