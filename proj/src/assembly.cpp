#include "vemnn/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vemnn {

namespace {

// Frobenius weights of the (xx, yy, xy) components of a symmetric tensor.
constexpr std::array<double, 3> sym_weights{1.0, 1.0, 2.0};

int local_edge_index(const PolygonalMesh& mesh, int cell, int edge) {
  const auto ce = mesh.cell_edges(cell);
  for (std::size_t j = 0; j < ce.size(); ++j)
    if (ce[j] == edge) return static_cast<int>(j);
  throw MeshError("edge " + std::to_string(edge) + " not found in cell " + std::to_string(cell));
}

// (xx, yy, xy) values of Pi0 eps(v) at every assembly node.
Eigen::MatrixXd eps_at_nodes(const LocalElementOps& ops, const Eigen::VectorXd& eps_coeffs) {
  const Eigen::MatrixXd& m = ops.assembly_basis_km1();
  const int d1 = static_cast<int>(m.cols());
  Eigen::MatrixXd vals(m.rows(), 3);
  for (int c = 0; c < 3; ++c) vals.col(c) = m * eps_coeffs.segment(c * d1, d1);
  return vals;
}

double sym_norm(const Eigen::Ref<const Eigen::RowVectorXd>& e) {
  return std::sqrt(e(0) * e(0) + e(1) * e(1) + 2.0 * e(2) * e(2));
}

} // namespace

GlobalDofMap::GlobalDofMap(const PolygonalMesh& mesh, int k) {
  const int nv = mesh.num_vertices();
  const int ne = mesh.num_edges();
  const int nc = mesh.num_cells();
  pressure_per_cell_ = poly_dim(k - 1);
  const int div_per_cell = pressure_per_cell_ - 1;
  num_velocity_ = 2 * nv + 2 * ne + div_per_cell * nc;
  num_pressure_ = pressure_per_cell_ * nc;

  cell_dofs_.resize(static_cast<std::size_t>(nc));
  for (int c = 0; c < nc; ++c) {
    const auto verts = mesh.cell(c);
    const auto edges = mesh.cell_edges(c);
    const DofLayout layout = build_layout(static_cast<int>(verts.size()), k);
    auto& d = cell_dofs_[static_cast<std::size_t>(c)];
    d.assign(static_cast<std::size_t>(layout.size()), -1);
    for (std::size_t j = 0; j < verts.size(); ++j) {
      const int lj = static_cast<int>(j);
      for (int comp = 0; comp < 2; ++comp) d[static_cast<std::size_t>(layout.vertex_dof(lj, comp))] = 2 * verts[j] + comp;
      d[static_cast<std::size_t>(layout.edge_tangent_dof(lj))] = 2 * nv + 2 * edges[j];
      d[static_cast<std::size_t>(layout.edge_normal_dof(lj))] = 2 * nv + 2 * edges[j] + 1;
    }
    for (int i = 0; i < layout.divergence; ++i)
      d[static_cast<std::size_t>(layout.divergence_dof(i))] = 2 * nv + 2 * ne + div_per_cell * c + i;
  }

  dirichlet_.assign(static_cast<std::size_t>(num_velocity_), 0);
  for (int e = 0; e < ne; ++e) {
    const Edge& edge = mesh.edge(e);
    if (!edge.on_boundary()) continue;
    if (edge.tag != BoundaryTag::dirichlet) {
      pure_dirichlet_ = false;
      continue;
    }
    for (int v : edge.v) dirichlet_[static_cast<std::size_t>(2 * v)] = dirichlet_[static_cast<std::size_t>(2 * v + 1)] = 1;
    dirichlet_[static_cast<std::size_t>(2 * nv + 2 * e)] = dirichlet_[static_cast<std::size_t>(2 * nv + 2 * e + 1)] = 1;
  }
  num_dirichlet_ = static_cast<int>(std::count(dirichlet_.begin(), dirichlet_.end(), 1));
}

Discretization::Discretization(PolygonalMesh mesh, int k) : mesh_(std::move(mesh)), k_(k), dofs_(mesh_, k) {
  ops_.reserve(static_cast<std::size_t>(mesh_.num_cells()));
  for (int c = 0; c < mesh_.num_cells(); ++c) ops_.emplace_back(mesh_, c, k);
}

Eigen::VectorXd Discretization::gather(const Eigen::VectorXd& global, int cell) const {
  const auto& d = dofs_.cell_dofs(cell);
  Eigen::VectorXd local(static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) local(static_cast<Eigen::Index>(i)) = global(d[i]);
  return local;
}

std::vector<double> mean_viscosity(const Discretization& disc, const RheologyParams& params) {
  std::vector<double> mu(static_cast<std::size_t>(disc.num_cells()));
  for (int c = 0; c < disc.num_cells(); ++c) {
    const auto& rule = disc.ops(c).assembly_rule();
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * params.mu(rule.nodes[q]);
    mu[static_cast<std::size_t>(c)] = s / disc.ops(c).geometry().area;
  }
  return mu;
}

double stabilization_coefficient(double mu_bar, double h, double dof_norm, const RheologyParams& params) {
  if (params.r == 2.0) return mu_bar;
  const double base = std::pow(params.delta, params.alpha) + std::pow(dof_norm / h, params.alpha);
  if (base == 0.0) return 0.0;
  return mu_bar * std::pow(base, (params.r - 2.0) / params.alpha);
}

Eigen::MatrixXd local_picard_matrix(const LocalElementOps& ops, const Eigen::VectorXd& v_local, double mu_bar,
                                    const RheologyParams& params, double viscosity_floor) {
  const Eigen::MatrixXd& pe = ops.pi0_eps();
  const Eigen::MatrixXd& m = ops.assembly_basis_km1();
  const auto& rule = ops.assembly_rule();
  const int d1 = static_cast<int>(m.cols());
  const double floor = viscosity_floor * mu_bar;

  const Eigen::MatrixXd eps = eps_at_nodes(ops, pe * v_local);
  Eigen::MatrixXd mnu = Eigen::MatrixXd::Zero(d1, d1);
  for (Eigen::Index q = 0; q < m.rows(); ++q) {
    const std::size_t qs = static_cast<std::size_t>(q);
    const double nu =
        std::max(effective_viscosity(sym_norm(eps.row(q)), params.mu(rule.nodes[qs]), params), floor);
    mnu += (rule.weights[qs] * nu) * m.row(q).transpose() * m.row(q);
  }
  const int n = ops.num_dofs();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < 3; ++c) {
    const auto pc = pe.middleRows(c * d1, d1);
    a += sym_weights[static_cast<std::size_t>(c)] * pc.transpose() * mnu * pc;
  }
  const Eigen::MatrixXd& qm = ops.stab_projector();
  const double s =
      std::max(stabilization_coefficient(mu_bar, ops.geometry().diameter, (qm * v_local).norm(), params), floor);
  a += s * qm.transpose() * qm;
  return a;
}

SparseMatrix picard_operator(const Discretization& disc, const Eigen::VectorXd& u_old, const RheologyParams& params,
                             const std::vector<double>& mu_bar, double viscosity_floor) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < disc.num_cells(); ++c) {
    const Eigen::MatrixXd a =
        local_picard_matrix(disc.ops(c), disc.gather(u_old, c), mu_bar[static_cast<std::size_t>(c)], params, viscosity_floor);
    if (!a.allFinite()) throw SolverError("non-finite Picard matrix on cell " + std::to_string(c));
    const auto& d = disc.dofs().cell_dofs(c);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j)
        trips.emplace_back(d[static_cast<std::size_t>(i)], d[static_cast<std::size_t>(j)], a(i, j));
  }
  const int n = disc.dofs().num_velocity();
  SparseMatrix a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

Eigen::VectorXd apply_nonlinear(const Discretization& disc, const Eigen::VectorXd& u, const RheologyParams& params,
                                const std::vector<double>& mu_bar) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(disc.dofs().num_velocity());
  for (int c = 0; c < disc.num_cells(); ++c) {
    const Eigen::VectorXd ul = disc.gather(u, c);
    const Eigen::VectorXd y = local_picard_matrix(disc.ops(c), ul, mu_bar[static_cast<std::size_t>(c)], params, 0.0) * ul;
    const auto& d = disc.dofs().cell_dofs(c);
    for (std::size_t i = 0; i < d.size(); ++i) out(d[i]) += y(static_cast<Eigen::Index>(i));
  }
  return out;
}

SparseMatrix assemble_b(const Discretization& disc) {
  const auto& dm = disc.dofs();
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < disc.num_cells(); ++c) {
    const Eigen::MatrixXd& mom = disc.ops(c).div_moments();
    const auto& d = dm.cell_dofs(c);
    for (Eigen::Index a = 0; a < mom.rows(); ++a)
      for (Eigen::Index j = 0; j < mom.cols(); ++j)
        if (mom(a, j) != 0.0) trips.emplace_back(dm.pressure_dof(c, static_cast<int>(a)), d[static_cast<std::size_t>(j)], -mom(a, j));
  }
  SparseMatrix b(dm.num_pressure(), dm.num_velocity());
  b.setFromTriplets(trips.begin(), trips.end());
  return b;
}

Eigen::VectorXd pressure_mean_weights(const Discretization& disc) {
  const auto& dm = disc.dofs();
  Eigen::VectorXd c(dm.num_pressure());
  for (int e = 0; e < disc.num_cells(); ++e)
    for (int a = 0; a < dm.pressure_per_cell(); ++a) c(dm.pressure_dof(e, a)) = disc.ops(e).moments_km1()(a);
  return c;
}

QuadratureRule cell_rule(const Discretization& disc, int cell, const LoadOptions& options) {
  const auto& ops = disc.ops(cell);
  if (options.singular_point)
    return singular_polygon_rule(ops.loop(), ops.geometry(), options.degree, *options.singular_point);
  return polygon_rule(ops.loop(), ops.geometry(), options.degree);
}

Eigen::VectorXd assemble_rhs(const Discretization& disc, const VectorField& f, const LoadOptions& options,
                             const std::optional<VectorField>& traction) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(disc.dofs().num_velocity());
  for (int c = 0; c < disc.num_cells(); ++c) {
    const auto& ops = disc.ops(c);
    const MonomialBasis bk = ops.basis(ops.k());
    const int dk = bk.size();
    const QuadratureRule rule = cell_rule(disc, c, options);
    Eigen::VectorXd mom = Eigen::VectorXd::Zero(2 * dk);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d fv = f(rule.nodes[q]);
      const Eigen::VectorXd m = bk.eval(rule.nodes[q]);
      mom.head(dk) += rule.weights[q] * fv.x() * m;
      mom.tail(dk) += rule.weights[q] * fv.y() * m;
    }
    const Eigen::VectorXd local = ops.pi0().transpose() * mom;
    const auto& d = disc.dofs().cell_dofs(c);
    for (std::size_t i = 0; i < d.size(); ++i) rhs(d[i]) += local(static_cast<Eigen::Index>(i));
  }
  if (traction) {
    const PolygonalMesh& mesh = disc.mesh();
    const auto& g = gauss_legendre(6);
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const Edge& edge = mesh.edge(e);
      if (!edge.on_boundary() || edge.tag != BoundaryTag::neumann) continue;
      const int c = edge.cells[0];
      const auto& ops = disc.ops(c);
      const int j = local_edge_index(mesh, c, e);
      const auto& le = ops.edges()[static_cast<std::size_t>(j)];
      Eigen::VectorXd local = Eigen::VectorXd::Zero(ops.num_dofs());
      for (std::size_t q = 0; q < g.nodes.size(); ++q) {
        const double s = g.nodes[q];
        const Eigen::Vector2d tv = (*traction)(le.a + s * (le.b - le.a));
        local += g.weights[q] * le.length * ops.trace(j, s).transpose() * tv;
      }
      const auto& d = disc.dofs().cell_dofs(c);
      for (std::size_t i = 0; i < d.size(); ++i) rhs(d[i]) += local(static_cast<Eigen::Index>(i));
    }
  }
  return rhs;
}

Eigen::VectorXd dirichlet_values(const Discretization& disc, const VectorField& g) {
  const PolygonalMesh& mesh = disc.mesh();
  const int nv = mesh.num_vertices();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(disc.dofs().num_velocity());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    if (!edge.on_boundary() || edge.tag != BoundaryTag::dirichlet) continue;
    const auto vals = edge_interpolant(mesh.vertex(edge.v[0]), mesh.vertex(edge.v[1]), g);
    out(2 * edge.v[0]) = vals[0];
    out(2 * edge.v[0] + 1) = vals[1];
    out(2 * edge.v[1]) = vals[2];
    out(2 * edge.v[1] + 1) = vals[3];
    out(2 * nv + 2 * e) = vals[4];
    out(2 * nv + 2 * e + 1) = vals[5];
  }
  return out;
}

double boundary_flux(const Discretization& disc, const Eigen::VectorXd& dirichlet) {
  const PolygonalMesh& mesh = disc.mesh();
  const int nv = mesh.num_vertices();
  double flux = 0.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    if (!edge.on_boundary() || edge.tag != BoundaryTag::dirichlet) continue;
    const int c = edge.cells[0];
    const auto& le = disc.ops(c).edges()[static_cast<std::size_t>(local_edge_index(mesh, c, e))];
    flux += le.orientation * le.length * dirichlet(2 * nv + 2 * e + 1);
  }
  return flux;
}

MomentumResidual residual(const Discretization& disc, const Eigen::VectorXd& u, const Eigen::VectorXd& p,
                          const RheologyParams& params, const std::vector<double>& mu_bar, const Eigen::VectorXd& rhs) {
  const SparseMatrix b = assemble_b(disc);
  const Eigen::VectorXd full = rhs - apply_nonlinear(disc, u, params, mu_bar) - b.transpose() * p;
  const auto& mask = disc.dofs().dirichlet_mask();
  MomentumResidual r;
  r.momentum.resize(disc.dofs().num_velocity() - disc.dofs().num_dirichlet());
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) r.momentum(k++) = full(static_cast<Eigen::Index>(i));
  r.mass = b * u;
  return r;
}

double discrete_norm(const Discretization& disc, const Eigen::VectorXd& u, double r) {
  double total = 0.0;
  for (int c = 0; c < disc.num_cells(); ++c) {
    const auto& ops = disc.ops(c);
    const Eigen::VectorXd ul = disc.gather(u, c);
    const Eigen::MatrixXd eps = eps_at_nodes(ops, ops.pi0_eps() * ul);
    const auto& rule = ops.assembly_rule();
    for (Eigen::Index q = 0; q < eps.rows(); ++q)
      total += rule.weights[static_cast<std::size_t>(q)] * std::pow(sym_norm(eps.row(q)), r);
    const double h = ops.geometry().diameter;
    total += std::pow(h, 2.0 - r) * std::pow((ops.stab_projector() * ul).norm(), r);
  }
  return std::pow(total, 1.0 / r);
}

double error_measure(const Discretization& disc, const Eigen::VectorXd& u, const RheologyParams& params,
                     const std::vector<double>& mu_bar) {
  const double r = params.r;
  double total = 0.0;
  for (int c = 0; c < disc.num_cells(); ++c) {
    const auto& ops = disc.ops(c);
    const Eigen::VectorXd ul = disc.gather(u, c);
    const Eigen::MatrixXd eps = eps_at_nodes(ops, ops.pi0_eps() * ul);
    const auto& rule = ops.assembly_rule();
    for (Eigen::Index q = 0; q < eps.rows(); ++q)
      total += rule.weights[static_cast<std::size_t>(q)] * std::pow(sym_norm(eps.row(q)), r);
    const double dn = (ops.stab_projector() * ul).norm();
    total += stabilization_coefficient(mu_bar[static_cast<std::size_t>(c)], ops.geometry().diameter, dn, params) * dn * dn;
  }
  return std::pow(total, 1.0 / r);
}

} // namespace vemnn
