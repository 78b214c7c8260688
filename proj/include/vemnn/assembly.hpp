#pragma once

#include "vemnn/constitutive.hpp"
#include "vemnn/element.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <optional>
#include <vector>

namespace vemnn {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Global numbering. Velocity: vertex v -> (2v, 2v+1); edge e -> 2V + 2e
/// (tangent) and 2V + 2e + 1 (normal); cell c -> 2V + 2E + 2c + i (divergence
/// moments). Pressure: poly_dim(k-1) scaled monomials per cell, after velocity.
class GlobalDofMap {
public:
  explicit GlobalDofMap(const PolygonalMesh& mesh, int k = 2);

  int num_velocity() const { return num_velocity_; }
  int num_pressure() const { return num_pressure_; }
  int pressure_per_cell() const { return pressure_per_cell_; }
  int pressure_dof(int cell, int a) const { return cell * pressure_per_cell_ + a; }

  /// Local-to-global velocity indices of a cell, in DofLayout order.
  const std::vector<int>& cell_dofs(int cell) const { return cell_dofs_[static_cast<std::size_t>(cell)]; }

  const std::vector<char>& dirichlet_mask() const { return dirichlet_; }
  int num_dirichlet() const { return num_dirichlet_; }
  /// True when every boundary edge is Dirichlet; the pressure then carries a
  /// zero-mean multiplier.
  bool pure_dirichlet() const { return pure_dirichlet_; }

private:
  int num_velocity_ = 0;
  int num_pressure_ = 0;
  int pressure_per_cell_ = 0;
  int num_dirichlet_ = 0;
  bool pure_dirichlet_ = true;
  std::vector<std::vector<int>> cell_dofs_;
  std::vector<char> dirichlet_;
};

/// Mesh plus everything computed once per mesh: local element operators and
/// the global numbering.
class Discretization {
public:
  explicit Discretization(PolygonalMesh mesh, int k = 2);

  const PolygonalMesh& mesh() const { return mesh_; }
  const GlobalDofMap& dofs() const { return dofs_; }
  const LocalElementOps& ops(int cell) const { return ops_[static_cast<std::size_t>(cell)]; }
  int num_cells() const { return mesh_.num_cells(); }
  int k() const { return k_; }

  Eigen::VectorXd gather(const Eigen::VectorXd& global, int cell) const;

private:
  PolygonalMesh mesh_;
  int k_;
  GlobalDofMap dofs_;
  std::vector<LocalElementOps> ops_;
};

/// Per-cell mean of mu.
std::vector<double> mean_viscosity(const Discretization& disc, const RheologyParams& params);

/// s_E = mu_E (delta^alpha + h_E^-alpha |DOF((I - Pi0) v)|^alpha)^((r-2)/alpha).
double stabilization_coefficient(double mu_bar, double h, double dof_norm, const RheologyParams& params);

/// Local a_h(v; .) frozen at v: returns the matrix A_E(v) with a_h(v, w) = w . A_E(v) v.
Eigen::MatrixXd local_picard_matrix(const LocalElementOps& ops, const Eigen::VectorXd& v_local, double mu_bar,
                                    const RheologyParams& params, double viscosity_floor);

/// Global Picard operator A(U_old) on all velocity DoFs (constraints not applied).
SparseMatrix picard_operator(const Discretization& disc, const Eigen::VectorXd& u_old, const RheologyParams& params,
                             const std::vector<double>& mu_bar, double viscosity_floor = 1e-14);

/// a_h(U; .) as a vector over all velocity DoFs (nonlinear, no floor).
Eigen::VectorXd apply_nonlinear(const Discretization& disc, const Eigen::VectorXd& u, const RheologyParams& params,
                                const std::vector<double>& mu_bar);

/// B[q, v] = -int div(v) q.
SparseMatrix assemble_b(const Discretization& disc);

/// Column c with c[pressure_dof(E, a)] = int_E m_a (zero-mean constraint).
Eigen::VectorXd pressure_mean_weights(const Discretization& disc);

struct LoadOptions {
  /// Default 2k + 3 for k = 2, the assembly rule degree.
  int degree = 7;
  /// Cells containing this point are integrated with a rule graded towards it.
  std::optional<Point> singular_point;
};

/// Rule used for load and error integrals on a cell.
QuadratureRule cell_rule(const Discretization& disc, int cell, const LoadOptions& options);

/// F[v] = sum_E int_E f . Pi0_k v (plus Neumann traction on tagged edges).
Eigen::VectorXd assemble_rhs(const Discretization& disc, const VectorField& f, const LoadOptions& options = {},
                             const std::optional<VectorField>& traction = std::nullopt);

/// DoF values on Dirichlet entries (zero elsewhere) interpolating the boundary data.
Eigen::VectorXd dirichlet_values(const Discretization& disc, const VectorField& g);

/// Net outward flux of the Dirichlet data as represented by its DoFs.
double boundary_flux(const Discretization& disc, const Eigen::VectorXd& dirichlet);

struct MomentumResidual {
  Eigen::VectorXd momentum;  // free velocity DoFs only
  Eigen::VectorXd mass;      // B U
};

/// F - a_h(U; .) - B^T P restricted to free DoFs, and B U.
MomentumResidual residual(const Discretization& disc, const Eigen::VectorXd& u, const Eigen::VectorXd& p,
                          const RheologyParams& params, const std::vector<double>& mu_bar, const Eigen::VectorXd& rhs);

/// |||v|||_r on the discrete space.
double discrete_norm(const Discretization& disc, const Eigen::VectorXd& u, double r);

/// |||v|||_{delta,r} (stabilization replaces the scaled DoF term).
double error_measure(const Discretization& disc, const Eigen::VectorXd& u, const RheologyParams& params,
                     const std::vector<double>& mu_bar);

} // namespace vemnn
