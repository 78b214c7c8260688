#pragma once

#include "vemnn/mesh.hpp"
#include "vemnn/polyspace.hpp"
#include "vemnn/quadrature.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

namespace vemnn {

using VectorField = std::function<Eigen::Vector2d(const Point&)>;
using ScalarField = std::function<double(const Point&)>;

/// Local degrees of freedom of the divergence-free virtual element space.
///
/// Ordering: vertex values (x, y) for each vertex in CCW order; for each edge in
/// CCW order the tangential moments then the normal moments, both against scaled
/// edge monomials and divided by |e|; interior x_perp moments (empty for k = 2);
/// divergence moments (h_E/|E|) int div(v) m_a for 0 < |a| <= k-1.
///
/// Edge moments use the global edge direction (lower to higher vertex index)
/// for t_e and n_e = (t_y, -t_x), so local and global edge DoFs coincide.
struct DofLayout {
  int k = 2;
  int num_vertices = 0;
  int tangent_per_edge = 0;
  int normal_per_edge = 0;
  int interior = 0;
  int divergence = 0;

  int size() const {
    return 2 * num_vertices + num_vertices * (tangent_per_edge + normal_per_edge) + interior + divergence;
  }
  int vertex_dof(int v, int component) const { return 2 * v + component; }
  int edge_tangent_dof(int e, int i = 0) const {
    return 2 * num_vertices + e * (tangent_per_edge + normal_per_edge) + i;
  }
  int edge_normal_dof(int e, int i = 0) const { return edge_tangent_dof(e) + tangent_per_edge + i; }
  int interior_dof(int i) const { return 2 * num_vertices + num_vertices * (tangent_per_edge + normal_per_edge) + i; }
  int divergence_dof(int i) const { return interior_dof(interior) + i; }
};

/// Throws ElementError for k != 2 (the only validated order).
DofLayout build_layout(int num_vertices, int k = 2);

struct LocalEdge {
  Point a, b;             // local CCW endpoints
  Eigen::Vector2d tangent;  // global direction
  Eigen::Vector2d normal;   // (t_y, -t_x)
  double length = 0.0;
  int orientation = 1;    // +1 if a -> b follows the global direction
  int global_index = -1;

  Eigen::Vector2d outward_normal() const { return orientation * normal; }
};

/// Projection and DoF matrices of one element. Vector polynomials in [P_n]^2 are
/// stored as [x-coefficients, y-coefficients]; the gradient projection stores the
/// components (dx vx, dy vx, dx vy, dy vy) each with poly_dim(k-1) coefficients.
class LocalElementOps {
public:
  LocalElementOps(const PolygonalMesh& mesh, int cell, int k = 2);

  int cell() const { return cell_; }
  int k() const { return layout_.k; }
  int num_dofs() const { return layout_.size(); }
  const DofLayout& layout() const { return layout_; }
  const ElementGeometry& geometry() const { return geometry_; }
  const std::vector<Point>& loop() const { return loop_; }
  const std::vector<LocalEdge>& edges() const { return edges_; }

  MonomialBasis basis(int degree) const { return {degree, geometry_.centroid, geometry_.diameter}; }

  /// Elliptic projection onto [P_k]^2.
  const Eigen::MatrixXd& pi_nabla() const { return pi_nabla_; }
  /// L2 projection onto [P_k]^2.
  const Eigen::MatrixXd& pi0() const { return pi0_; }
  /// L2 projection of the full gradient onto [P_{k-1}]^{2x2}.
  const Eigen::MatrixXd& pi0_grad() const { return pi0_grad_; }
  /// L2 projection of the symmetric gradient, components (xx, yy, xy).
  const Eigen::MatrixXd& pi0_eps() const { return pi0_eps_; }
  /// Coefficients of div v in P_{k-1}.
  const Eigen::MatrixXd& div_coeffs() const { return div_coeffs_; }
  /// Moments int_E div(v) m_a for every m_a in P_{k-1}.
  const Eigen::MatrixXd& div_moments() const { return div_moments_; }
  /// Column j = DoFs of the j-th vector monomial of [P_k]^2.
  const Eigen::MatrixXd& dof_poly() const { return dof_poly_; }
  /// DOF((I - Pi0_k) v) = stab_projector * DOF(v).
  const Eigen::MatrixXd& stab_projector() const { return stab_projector_; }
  /// Scalar mass matrices of P_k and P_{k-1}.
  const Eigen::MatrixXd& mass_k() const { return mass_k_; }
  const Eigen::MatrixXd& mass_km1() const { return mass_km1_; }
  /// int_E m_a for m_a in P_{k-1}.
  const Eigen::VectorXd& moments_km1() const { return moments_km1_; }

  /// 2 x N matrix giving the trace at parameter s in [0,1] along local edge j.
  Eigen::Matrix<double, 2, Eigen::Dynamic> trace(int j, double s) const;

  /// Row vector: DoFs -> int_E v . grad(p) for p in P_n with the given coefficients.
  Eigen::RowVectorXd gradient_moment(const Eigen::VectorXd& p, int degree) const;

  /// Rule for nonlinear integrands, exact to degree 2k+3.
  const QuadratureRule& assembly_rule() const { return assembly_rule_; }
  /// P_{k-1} basis values at the assembly rule nodes (one row per node).
  const Eigen::MatrixXd& assembly_basis_km1() const { return assembly_basis_km1_; }

  /// Symmetric gradient projection evaluated from gradient coefficients.
  Eigen::Matrix2d eval_grad(const Eigen::VectorXd& grad_coeffs, const Point& x) const;

private:
  void build_edges(const PolygonalMesh& mesh);
  void build_divergence();
  void build_pi_nabla();
  void build_pi0();
  void build_pi0_grad();
  void build_dof_poly();

  int cell_;
  DofLayout layout_;
  ElementGeometry geometry_;
  std::vector<Point> loop_;
  std::vector<LocalEdge> edges_;
  QuadratureRule projection_rule_;
  QuadratureRule assembly_rule_;
  Eigen::MatrixXd assembly_basis_km1_;
  Eigen::MatrixXd mass_k_, mass_km1_;
  Eigen::VectorXd moments_km1_;
  Eigen::MatrixXd div_moments_, div_coeffs_;
  Eigen::MatrixXd mean_rows_;
  Eigen::MatrixXd pi_nabla_, pi0_, pi0_grad_, pi0_eps_;
  Eigen::MatrixXd dof_poly_, stab_projector_;
};

/// DoFs of a vector polynomial in [P_k]^2 (coefficient layout as above).
Eigen::VectorXd dofs_of_polynomial(const LocalElementOps& ops, const Eigen::VectorXd& coeffs);

/// DoF interpolant of a smooth field. When `divergence` is given the divergence
/// moments use it directly; otherwise they are recovered by integration by parts.
Eigen::VectorXd interpolate(const LocalElementOps& ops, const VectorField& u,
                            const std::optional<ScalarField>& divergence = std::nullopt, int degree = 9);

/// Vertex values and edge moments of a field on a single edge, in the order
/// (va_x, va_y, vb_x, vb_y, tangent moment, normal moment), with a < b global.
std::array<double, 6> edge_interpolant(const Point& a, const Point& b, const VectorField& u, int degree = 11);

} // namespace vemnn
