#include "vemnn/polyspace.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace vemnn {

std::array<int, 2> monomial_exponent(int i) {
  int d = 0;
  while (poly_dim(d) <= i) ++d;
  const int a2 = i - poly_dim(d - 1);
  return {d - a2, a2};
}

MonomialBasis::MonomialBasis(int degree, const Point& center, double h) : degree_(degree), center_(center), h_(h) {}

Eigen::VectorXd MonomialBasis::eval(const Point& x) const {
  const Point s = scaled(x);
  Eigen::VectorXd v(size());
  if (size() == 0) return v;
  v(0) = 1.0;
  // Degree d members follow from degree d-1 ones: multiply by s.x, and the last by s.y.
  for (int d = 1; d <= degree_; ++d) {
    const int prev = poly_dim(d - 2);
    const int cur = poly_dim(d - 1);
    for (int a2 = 0; a2 < d; ++a2) v(cur + a2) = v(prev + a2) * s.x();
    v(cur + d) = v(prev + d - 1) * s.y();
  }
  return v;
}

Eigen::MatrixXd MonomialBasis::eval(std::span<const Point> points) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), size());
  for (std::size_t i = 0; i < points.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = eval(points[i]).transpose();
  return out;
}

Eigen::Matrix<double, 2, Eigen::Dynamic> MonomialBasis::eval_grad(const Point& x) const {
  const int n = size();
  Eigen::Matrix<double, 2, Eigen::Dynamic> g = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, n);
  if (degree_ < 1) return g;
  const MonomialBasis lower(degree_ - 1, center_, h_);
  const Eigen::VectorXd v = lower.eval(x);
  for (int i = 0; i < n; ++i) {
    const auto [a1, a2] = monomial_exponent(i);
    if (a1 > 0) g(0, i) = a1 * v(monomial_index(a1 - 1, a2)) / h_;
    if (a2 > 0) g(1, i) = a2 * v(monomial_index(a1, a2 - 1)) / h_;
  }
  return g;
}

Eigen::MatrixXd MonomialBasis::derivative_matrix(int dir) const {
  const int n = size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto [a1, a2] = monomial_exponent(i);
    if (dir == 0 && a1 > 0) d(monomial_index(a1 - 1, a2), i) = a1 / h_;
    if (dir == 1 && a2 > 0) d(monomial_index(a1, a2 - 1), i) = a2 / h_;
  }
  return d;
}

Eigen::MatrixXd MonomialBasis::laplacian_matrix() const {
  const Eigen::MatrixXd dx = derivative_matrix(0);
  const Eigen::MatrixXd dy = derivative_matrix(1);
  return dx * dx + dy * dy;
}

double MonomialBasis::eval_poly(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const Point& x) const {
  return coeffs.dot(eval(x));
}

Eigen::VectorXd multiply_polys(const Eigen::Ref<const Eigen::VectorXd>& p, int deg_p,
                               const Eigen::Ref<const Eigen::VectorXd>& q, int deg_q) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(poly_dim(deg_p + deg_q));
  for (int i = 0; i < poly_dim(deg_p); ++i) {
    if (p(i) == 0.0) continue;
    const auto [a1, a2] = monomial_exponent(i);
    for (int j = 0; j < poly_dim(deg_q); ++j) {
      const auto [b1, b2] = monomial_exponent(j);
      out(monomial_index(a1 + b1, a2 + b2)) += p(i) * q(j);
    }
  }
  return out;
}

VectorPolyDecomposition decompose_vector_poly(int n) {
  if (n < 0) throw ElementError("decompose_vector_poly: degree must be >= 0");
  VectorPolyDecomposition d;
  d.degree = n;
  const int dim = poly_dim(n);
  d.num_gradient = poly_dim(n + 1) - 1;
  d.num_rotational = poly_dim(n - 1);
  d.generators = Eigen::MatrixXd::Zero(2 * dim, d.num_gradient + d.num_rotational);
  int col = 0;
  for (int b = 1; b < poly_dim(n + 1); ++b, ++col) {
    const auto [b1, b2] = monomial_exponent(b);
    if (b1 > 0) d.generators(monomial_index(b1 - 1, b2), col) = b1;
    if (b2 > 0) d.generators(dim + monomial_index(b1, b2 - 1), col) = b2;
  }
  for (int c = 0; c < poly_dim(n - 1); ++c, ++col) {
    const auto [c1, c2] = monomial_exponent(c);
    d.generators(monomial_index(c1, c2 + 1), col) = 1.0;
    d.generators(dim + monomial_index(c1 + 1, c2), col) = -1.0;
  }
  if (d.generators.cols() != d.generators.rows())
    throw ElementError("decompose_vector_poly: generator count does not match dimension");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(d.generators);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (smin < 1e-10 * smax) throw ElementError("decompose_vector_poly: generator matrix is rank deficient");
  d.condition = smax / smin;
  d.inverse = d.generators.inverse();
  return d;
}

} // namespace vemnn
