#pragma once

#include "vemnn/mesh.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>

namespace vemnn {

/// Number of monomials of total degree <= n in two variables; 0 for n < 0.
constexpr int poly_dim(int n) { return n < 0 ? 0 : (n + 1) * (n + 2) / 2; }

/// Exponent (a1, a2) of the i-th monomial in graded lexicographic order:
/// (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
std::array<int, 2> monomial_exponent(int i);

/// Inverse of monomial_exponent.
constexpr int monomial_index(int a1, int a2) {
  const int d = a1 + a2;
  return poly_dim(d - 1) + a2;
}

/// Scaled monomials m_a(x) = ((x - x_E)/h_E)^a on an element.
class MonomialBasis {
public:
  MonomialBasis(int degree, const Point& center, double h);

  int degree() const { return degree_; }
  int size() const { return poly_dim(degree_); }
  const Point& center() const { return center_; }
  double h() const { return h_; }

  Point scaled(const Point& x) const { return (x - center_) / h_; }

  Eigen::VectorXd eval(const Point& x) const;
  /// One row per point.
  Eigen::MatrixXd eval(std::span<const Point> points) const;
  /// Row d holds the d-th partial derivative of every basis member.
  Eigen::Matrix<double, 2, Eigen::Dynamic> eval_grad(const Point& x) const;

  /// Column a holds the coefficients (in this same basis) of d/dx_dir m_a.
  Eigen::MatrixXd derivative_matrix(int dir) const;

  /// Coefficients of the Laplacian of each member (column a).
  Eigen::MatrixXd laplacian_matrix() const;

  double eval_poly(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const Point& x) const;

private:
  int degree_;
  Point center_;
  double h_;
};

/// Coefficients of the product of two polynomials given in the same scaled basis.
Eigen::VectorXd multiply_polys(const Eigen::Ref<const Eigen::VectorXd>& p, int deg_p,
                               const Eigen::Ref<const Eigen::VectorXd>& q, int deg_q);

/// Change of basis for [P_n]^2 = grad P_{n+1} (+) x_perp P_{n-1}, in scaled
/// coordinates (x_perp = (m_(0,1), -m_(1,0))). Vector polynomial coefficients
/// are laid out as [x-component (poly_dim(n)), y-component (poly_dim(n))].
/// Gradient generators are h_E * grad m_b for |b| = 1..n+1 in graded order,
/// followed by x_perp m_c for |c| <= n-1.
struct VectorPolyDecomposition {
  int degree = 0;
  int num_gradient = 0;
  int num_rotational = 0;
  Eigen::MatrixXd generators;  // column j = monomial coefficients of generator j
  Eigen::MatrixXd inverse;     // monomial coefficients -> generator weights
  double condition = 0.0;

  Eigen::VectorXd to_generators(const Eigen::Ref<const Eigen::VectorXd>& coeffs) const { return inverse * coeffs; }
  Eigen::VectorXd from_generators(const Eigen::Ref<const Eigen::VectorXd>& weights) const {
    return generators * weights;
  }
};

/// Throws ElementError if the generator matrix is rank deficient
/// (smallest singular value below 1e-10 times the largest).
VectorPolyDecomposition decompose_vector_poly(int n);

} // namespace vemnn
