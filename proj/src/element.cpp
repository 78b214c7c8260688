#include "vemnn/element.hpp"

#include <Eigen/LU>

#include <cmath>

namespace vemnn {

namespace {

// Boundary terms involve traces (degree k) times polynomials of degree <= k+1.
constexpr int boundary_points = 4;

Eigen::MatrixXd lu_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what, int cell) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double det = std::abs(lu.determinant());
  if (!(det > 0.0) || !std::isfinite(det))
    throw ElementError(std::string("singular ") + what + " on cell " + std::to_string(cell));
  return lu.solve(b);
}

} // namespace

DofLayout build_layout(int num_vertices, int k) {
  if (k != 2) throw ElementError("unsupported method order k=" + std::to_string(k) + " (only k=2 is available)");
  if (num_vertices < 3) throw ElementError("element needs at least 3 vertices");
  DofLayout l;
  l.k = k;
  l.num_vertices = num_vertices;
  l.tangent_per_edge = poly_dim(k - 2);
  l.normal_per_edge = poly_dim(std::max(2, k) - 2);
  l.interior = poly_dim(k - 3);
  l.divergence = poly_dim(k - 1) - 1;
  return l;
}

LocalElementOps::LocalElementOps(const PolygonalMesh& mesh, int cell, int k)
    : cell_(cell), layout_(build_layout(static_cast<int>(mesh.cell(cell).size()), k)), geometry_(mesh.geometry(cell)) {
  for (int v : mesh.cell(cell)) loop_.push_back(mesh.vertex(v));
  build_edges(mesh);
  projection_rule_ = polygon_rule(loop_, geometry_, 2 * k);
  assembly_rule_ = polygon_rule(loop_, geometry_, 2 * k + 3);

  const MonomialBasis bk = basis(k);
  const MonomialBasis bkm1 = basis(k - 1);
  mass_k_ = Eigen::MatrixXd::Zero(bk.size(), bk.size());
  mass_km1_ = Eigen::MatrixXd::Zero(bkm1.size(), bkm1.size());
  moments_km1_ = Eigen::VectorXd::Zero(bkm1.size());
  for (std::size_t q = 0; q < projection_rule_.size(); ++q) {
    const double w = projection_rule_.weights[q];
    const Eigen::VectorXd mk = bk.eval(projection_rule_.nodes[q]);
    const Eigen::VectorXd mk1 = bkm1.eval(projection_rule_.nodes[q]);
    mass_k_ += w * mk * mk.transpose();
    mass_km1_ += w * mk1 * mk1.transpose();
    moments_km1_ += w * mk1;
  }
  assembly_basis_km1_ = bkm1.eval(assembly_rule_.nodes);

  build_divergence();
  build_pi_nabla();
  build_pi0();
  build_pi0_grad();
  build_dof_poly();
  const int n = num_dofs();
  stab_projector_ = Eigen::MatrixXd::Identity(n, n) - dof_poly_ * pi0_;
}

void LocalElementOps::build_edges(const PolygonalMesh& mesh) {
  const auto verts = mesh.cell(cell_);
  const auto cedges = mesh.cell_edges(cell_);
  const std::size_t n = verts.size();
  edges_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto& e = edges_[j];
    e.a = loop_[j];
    e.b = loop_[(j + 1) % n];
    e.global_index = cedges[j];
    const auto& ge = mesh.edge(cedges[j]);
    const Point& ga = mesh.vertex(ge.v[0]);
    const Point& gb = mesh.vertex(ge.v[1]);
    e.length = (gb - ga).norm();
    e.tangent = (gb - ga) / e.length;
    e.normal = Eigen::Vector2d(e.tangent.y(), -e.tangent.x());
    e.orientation = verts[j] == ge.v[0] ? 1 : -1;
  }
}

Eigen::Matrix<double, 2, Eigen::Dynamic> LocalElementOps::trace(int j, double s) const {
  Eigen::Matrix<double, 2, Eigen::Dynamic> t = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, num_dofs());
  const int nv = layout_.num_vertices;
  const int a = j;
  const int b = (j + 1) % nv;
  // Each trace component is quadratic: linear interpolation of the endpoint
  // values plus a bubble 6 s (1 - s) fixing the edge mean.
  const double bubble = 6.0 * s * (1.0 - s);
  const double ca = 1.0 - s - 0.5 * bubble;
  const double cb = s - 0.5 * bubble;
  const auto& e = edges_[static_cast<std::size_t>(j)];
  for (int c = 0; c < 2; ++c) {
    t(c, layout_.vertex_dof(a, c)) += ca;
    t(c, layout_.vertex_dof(b, c)) += cb;
  }
  t.col(layout_.edge_tangent_dof(j)) = bubble * e.tangent;
  t.col(layout_.edge_normal_dof(j)) = bubble * e.normal;
  return t;
}

Eigen::RowVectorXd LocalElementOps::gradient_moment(const Eigen::VectorXd& p, int degree) const {
  const MonomialBasis bp = basis(degree);
  const MonomialBasis bkm1 = basis(k() - 1);
  // int v . grad p = -int p div v + int_{dE} p v.n
  Eigen::VectorXd pm = Eigen::VectorXd::Zero(bkm1.size());
  for (std::size_t q = 0; q < assembly_rule_.size(); ++q)
    pm += assembly_rule_.weights[q] * bp.eval_poly(p, assembly_rule_.nodes[q]) * assembly_basis_km1_.row(static_cast<Eigen::Index>(q)).transpose();
  Eigen::RowVectorXd row = -pm.transpose() * div_coeffs_;
  const auto& g = gauss_legendre(boundary_points);
  for (int j = 0; j < layout_.num_vertices; ++j) {
    const auto& e = edges_[static_cast<std::size_t>(j)];
    for (int q = 0; q < boundary_points; ++q) {
      const double s = g.nodes[static_cast<std::size_t>(q)];
      const double w = g.weights[static_cast<std::size_t>(q)] * e.length;
      const Point x = e.a + s * (e.b - e.a);
      row += (w * bp.eval_poly(p, x)) * e.outward_normal().transpose() * trace(j, s);
    }
  }
  return row;
}

void LocalElementOps::build_divergence() {
  const int n = num_dofs();
  const int dk1 = poly_dim(k() - 1);
  div_moments_ = Eigen::MatrixXd::Zero(dk1, n);
  const auto& g = gauss_legendre(boundary_points);
  for (int j = 0; j < layout_.num_vertices; ++j) {
    const auto& e = edges_[static_cast<std::size_t>(j)];
    for (int q = 0; q < boundary_points; ++q) {
      const double s = g.nodes[static_cast<std::size_t>(q)];
      const double w = g.weights[static_cast<std::size_t>(q)] * e.length;
      div_moments_.row(0) += w * e.outward_normal().transpose() * trace(j, s);
    }
  }
  const double scale = geometry_.area / geometry_.diameter;
  for (int i = 0; i < layout_.divergence; ++i) div_moments_(i + 1, layout_.divergence_dof(i)) = scale;
  div_coeffs_ = lu_solve(mass_km1_, div_moments_, "P_{k-1} mass matrix", cell_);

  const double h = geometry_.diameter;
  mean_rows_.resize(2, n);
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(poly_dim(1));
    p(1 + i) = h;  // h m_{e_i} = x_i - x_{E,i}
    mean_rows_.row(i) = gradient_moment(p, 1);
  }
}

void LocalElementOps::build_pi_nabla() {
  const int n = num_dofs();
  const MonomialBasis bk = basis(k());
  const int dk = bk.size();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dk, dk);
  for (std::size_t q = 0; q < projection_rule_.size(); ++q) {
    const auto grad = bk.eval_grad(projection_rule_.nodes[q]);
    gram += projection_rule_.weights[q] * grad.transpose() * grad;
  }
  const Eigen::MatrixXd lap = bk.laplacian_matrix();
  const auto& g = gauss_legendre(boundary_points);
  Eigen::RowVectorXd boundary_mean_row = Eigen::RowVectorXd::Zero(dk);
  std::array<Eigen::MatrixXd, 2> rhs;
  for (int i = 0; i < 2; ++i) rhs[static_cast<std::size_t>(i)] = Eigen::MatrixXd::Zero(dk, n);
  for (int j = 0; j < layout_.num_vertices; ++j) {
    const auto& e = edges_[static_cast<std::size_t>(j)];
    for (int q = 0; q < boundary_points; ++q) {
      const double s = g.nodes[static_cast<std::size_t>(q)];
      const double w = g.weights[static_cast<std::size_t>(q)] * e.length;
      const Point x = e.a + s * (e.b - e.a);
      const auto t = trace(j, s);
      const Eigen::VectorXd m = bk.eval(x);
      const Eigen::VectorXd dn = bk.eval_grad(x).transpose() * e.outward_normal();
      boundary_mean_row += w * m.transpose();
      for (int i = 0; i < 2; ++i) {
        auto& r = rhs[static_cast<std::size_t>(i)];
        r.row(0) += w * t.row(i);
        for (int a = 1; a < dk; ++a) r.row(a) += (w * dn(a)) * t.row(i);
      }
    }
  }
  gram.row(0) = boundary_mean_row;
  pi_nabla_.resize(2 * dk, n);
  for (int i = 0; i < 2; ++i) {
    auto& r = rhs[static_cast<std::size_t>(i)];
    // Laplacians of P_2 members are constants.
    for (int a = 1; a < dk; ++a) r.row(a) -= lap(0, a) * mean_rows_.row(i);
    pi_nabla_.middleRows(i * dk, dk) = lu_solve(gram, r, "elliptic projection Gram matrix", cell_);
  }
}

void LocalElementOps::build_pi0() {
  const int n = num_dofs();
  const int dk = poly_dim(k());
  const double h = geometry_.diameter;
  const VectorPolyDecomposition dec = decompose_vector_poly(k());
  Eigen::MatrixXd mass2 = Eigen::MatrixXd::Zero(2 * dk, 2 * dk);
  mass2.topLeftCorner(dk, dk) = mass_k_;
  mass2.bottomRightCorner(dk, dk) = mass_k_;

  // Moments of v against the generators of [P_k]^2: h grad m_b via the
  // divergence data and traces, x_perp m_c through the enhancement condition
  // (those moments equal the ones of the elliptic projection).
  Eigen::MatrixXd gen_moments(dec.num_gradient + dec.num_rotational, n);
  for (int b = 1; b < poly_dim(k() + 1); ++b) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(poly_dim(k() + 1));
    p(b) = h;
    gen_moments.row(b - 1) = gradient_moment(p, k() + 1);
  }
  const Eigen::MatrixXd rot = dec.generators.rightCols(dec.num_rotational);
  gen_moments.bottomRows(dec.num_rotational) = rot.transpose() * mass2 * pi_nabla_;
  const Eigen::MatrixXd system = dec.generators.transpose() * mass2;
  pi0_ = lu_solve(system, gen_moments, "L2 projection system", cell_);
}

void LocalElementOps::build_pi0_grad() {
  const int n = num_dofs();
  const MonomialBasis bk1 = basis(k() - 1);
  const int d1 = bk1.size();
  std::array<Eigen::MatrixXd, 2> deriv{bk1.derivative_matrix(0), bk1.derivative_matrix(1)};
  const auto& g = gauss_legendre(boundary_points);
  pi0_grad_.resize(4 * d1, n);
  for (int i = 0; i < 2; ++i)
    for (int dir = 0; dir < 2; ++dir) {
      // int d_dir v_i m_a = -int v_i d_dir m_a + int_{dE} m_a n_dir v_i
      Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(d1, n);
      for (int j = 0; j < layout_.num_vertices; ++j) {
        const auto& e = edges_[static_cast<std::size_t>(j)];
        const double nd = e.outward_normal()(dir);
        for (int q = 0; q < boundary_points; ++q) {
          const double s = g.nodes[static_cast<std::size_t>(q)];
          const double w = g.weights[static_cast<std::size_t>(q)] * e.length;
          const Eigen::VectorXd m = bk1.eval(e.a + s * (e.b - e.a));
          const Eigen::RowVectorXd tr = trace(j, s).row(i);
          for (int a = 0; a < d1; ++a) rhs.row(a) += (w * nd * m(a)) * tr;
        }
      }
      // Derivatives of P_1 members are constants.
      for (int a = 0; a < d1; ++a) rhs.row(a) -= deriv[static_cast<std::size_t>(dir)](0, a) * mean_rows_.row(i);
      pi0_grad_.middleRows((2 * i + dir) * d1, d1) = lu_solve(mass_km1_, rhs, "P_{k-1} mass matrix", cell_);
    }
  pi0_eps_.resize(3 * d1, n);
  pi0_eps_.middleRows(0, d1) = pi0_grad_.middleRows(0, d1);
  pi0_eps_.middleRows(d1, d1) = pi0_grad_.middleRows(3 * d1, d1);
  pi0_eps_.middleRows(2 * d1, d1) = 0.5 * (pi0_grad_.middleRows(d1, d1) + pi0_grad_.middleRows(2 * d1, d1));
}

void LocalElementOps::build_dof_poly() {
  const int n = num_dofs();
  const MonomialBasis bk = basis(k());
  const MonomialBasis bk1 = basis(k() - 1);
  const int dk = bk.size();
  dof_poly_ = Eigen::MatrixXd::Zero(n, 2 * dk);
  for (int v = 0; v < layout_.num_vertices; ++v) {
    const Eigen::VectorXd m = bk.eval(loop_[static_cast<std::size_t>(v)]);
    for (int i = 0; i < 2; ++i) dof_poly_.block(layout_.vertex_dof(v, i), i * dk, 1, dk) = m.transpose();
  }
  const auto& g = gauss_legendre(boundary_points);
  for (int j = 0; j < layout_.num_vertices; ++j) {
    const auto& e = edges_[static_cast<std::size_t>(j)];
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dk);
    for (int q = 0; q < boundary_points; ++q) {
      const double s = g.nodes[static_cast<std::size_t>(q)];
      mean += g.weights[static_cast<std::size_t>(q)] * bk.eval(e.a + s * (e.b - e.a));
    }
    for (int i = 0; i < 2; ++i) {
      dof_poly_.block(layout_.edge_tangent_dof(j), i * dk, 1, dk) = e.tangent(i) * mean.transpose();
      dof_poly_.block(layout_.edge_normal_dof(j), i * dk, 1, dk) = e.normal(i) * mean.transpose();
    }
  }
  const double scale = geometry_.diameter / geometry_.area;
  for (std::size_t q = 0; q < projection_rule_.size(); ++q) {
    const double w = projection_rule_.weights[q];
    const auto grad = bk.eval_grad(projection_rule_.nodes[q]);
    const Eigen::VectorXd m = bk1.eval(projection_rule_.nodes[q]);
    for (int d = 0; d < layout_.divergence; ++d)
      for (int i = 0; i < 2; ++i)
        dof_poly_.block(layout_.divergence_dof(d), i * dk, 1, dk) += (scale * w * m(d + 1)) * grad.row(i);
  }
}

Eigen::Matrix2d LocalElementOps::eval_grad(const Eigen::VectorXd& grad_coeffs, const Point& x) const {
  const MonomialBasis bk1 = basis(k() - 1);
  const int d1 = bk1.size();
  const Eigen::VectorXd m = bk1.eval(x);
  Eigen::Matrix2d g;
  for (int i = 0; i < 2; ++i)
    for (int dir = 0; dir < 2; ++dir) g(i, dir) = grad_coeffs.segment((2 * i + dir) * d1, d1).dot(m);
  return g;
}

Eigen::VectorXd dofs_of_polynomial(const LocalElementOps& ops, const Eigen::VectorXd& coeffs) {
  return ops.dof_poly() * coeffs;
}

std::array<double, 6> edge_interpolant(const Point& a, const Point& b, const VectorField& u, int degree) {
  const QuadratureRule rule = edge_rule(a, b, degree);
  const double len = (b - a).norm();
  const Eigen::Vector2d t = (b - a) / len;
  const Eigen::Vector2d n(t.y(), -t.x());
  double mt = 0.0;
  double mn = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::Vector2d val = u(rule.nodes[q]);
    mt += rule.weights[q] * val.dot(t);
    mn += rule.weights[q] * val.dot(n);
  }
  const Eigen::Vector2d ua = u(a);
  const Eigen::Vector2d ub = u(b);
  return {ua.x(), ua.y(), ub.x(), ub.y(), mt / len, mn / len};
}

Eigen::VectorXd interpolate(const LocalElementOps& ops, const VectorField& u, const std::optional<ScalarField>& divergence,
                            int degree) {
  const auto& layout = ops.layout();
  Eigen::VectorXd dofs = Eigen::VectorXd::Zero(layout.size());
  for (int v = 0; v < layout.num_vertices; ++v) {
    const Eigen::Vector2d val = u(ops.loop()[static_cast<std::size_t>(v)]);
    dofs(layout.vertex_dof(v, 0)) = val.x();
    dofs(layout.vertex_dof(v, 1)) = val.y();
  }
  for (int j = 0; j < layout.num_vertices; ++j) {
    const auto& e = ops.edges()[static_cast<std::size_t>(j)];
    const QuadratureRule rule = edge_rule(e.a, e.b, degree);
    double mt = 0.0;
    double mn = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d val = u(rule.nodes[q]);
      mt += rule.weights[q] * val.dot(e.tangent);
      mn += rule.weights[q] * val.dot(e.normal);
    }
    dofs(layout.edge_tangent_dof(j)) = mt / e.length;
    dofs(layout.edge_normal_dof(j)) = mn / e.length;
  }
  const auto& geom = ops.geometry();
  const MonomialBasis bk1 = ops.basis(ops.k() - 1);
  const QuadratureRule rule = polygon_rule(ops.loop(), geom, degree);
  Eigen::VectorXd moments = Eigen::VectorXd::Zero(layout.divergence);
  if (divergence) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd m = bk1.eval(rule.nodes[q]);
      const double d = (*divergence)(rule.nodes[q]);
      for (int i = 0; i < layout.divergence; ++i) moments(i) += rule.weights[q] * d * m(i + 1);
    }
  } else {
    // int div(u) m = int_{dE} u.n m - int u . grad m
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto grad = bk1.eval_grad(rule.nodes[q]);
      const Eigen::Vector2d val = u(rule.nodes[q]);
      for (int i = 0; i < layout.divergence; ++i) moments(i) -= rule.weights[q] * val.dot(grad.col(i + 1));
    }
    for (const auto& e : ops.edges()) {
      const QuadratureRule er = edge_rule(e.a, e.b, degree);
      for (std::size_t q = 0; q < er.size(); ++q) {
        const Eigen::VectorXd m = bk1.eval(er.nodes[q]);
        const double un = u(er.nodes[q]).dot(e.outward_normal());
        for (int i = 0; i < layout.divergence; ++i) moments(i) += er.weights[q] * un * m(i + 1);
      }
    }
  }
  for (int i = 0; i < layout.divergence; ++i)
    dofs(layout.divergence_dof(i)) = geom.diameter / geom.area * moments(i);
  return dofs;
}

} // namespace vemnn
