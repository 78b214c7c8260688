#include "vemnn/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace vemnn {

namespace {

double sym_norm(double xx, double yy, double xy) { return std::sqrt(xx * xx + yy * yy + 2.0 * xy * xy); }

} // namespace

Eigen::VectorXd interpolate_global(const Discretization& disc, const VectorField& u) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(disc.dofs().num_velocity());
  for (int c = 0; c < disc.num_cells(); ++c) {
    const Eigen::VectorXd local = interpolate(disc.ops(c), u);
    const auto& d = disc.dofs().cell_dofs(c);
    for (std::size_t i = 0; i < d.size(); ++i) out(d[i]) = local(static_cast<Eigen::Index>(i));
  }
  return out;
}

ErrorQuantities error_quantities(const Discretization& disc, const DiscreteState& state, const ExactSolution& exact,
                                 const RheologyParams& params, int degree) {
  const double r = params.r;
  const double rp = r / (r - 1.0);
  LoadOptions opt;
  opt.degree = degree;
  opt.singular_point = exact.singular_point;

  double tri_num = 0.0, tri_den = 0.0;
  double trg_num = 0.0, trg_den = 0.0;
  double w_num = 0.0, w_den = 0.0;
  double p_num = 0.0, p_den = 0.0;
  double s_num = 0.0, s_den = 0.0;
  for (int c = 0; c < disc.num_cells(); ++c) {
    const auto& ops = disc.ops(c);
    const MonomialBasis b1 = ops.basis(ops.k() - 1);
    const int d1 = b1.size();
    const QuadratureRule rule = cell_rule(disc, c, opt);
    const Eigen::MatrixXd m = b1.eval(rule.nodes);

    std::vector<Eigen::Matrix2d> grads(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) grads[q] = exact.grad_u(rule.nodes[q]);

    const Eigen::VectorXd uh = disc.gather(state.u, c);
    const Eigen::VectorXd eh = ops.pi0_eps() * uh;
    const Eigen::VectorXd gh = ops.pi0_grad() * uh;
    const Eigen::VectorXd ph = state.p.segment(disc.dofs().pressure_dof(c, 0), d1);

    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q];
      const Point& x = rule.nodes[q];
      const Eigen::RowVectorXd mq = m.row(static_cast<Eigen::Index>(q));
      Eigen::Vector3d he;
      for (int k = 0; k < 3; ++k) he(k) = mq.dot(eh.segment(k * d1, d1));
      const Eigen::Matrix2d e_ex = 0.5 * (grads[q] + grads[q].transpose());
      tri_num += w * std::pow(sym_norm(e_ex(0, 0) - he(0), e_ex(1, 1) - he(1), e_ex(0, 1) - he(2)), r);
      tri_den += w * std::pow(sym_norm(e_ex(0, 0), e_ex(1, 1), e_ex(0, 1)), r);

      Eigen::Matrix2d gproj;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) gproj(i, j) = mq.dot(gh.segment((2 * i + j) * d1, d1));
      w_num += w * std::pow((grads[q] - gproj).norm(), r);
      w_den += w * std::pow(grads[q].norm(), r);

      const double pex = exact.p(x);
      p_num += w * std::pow(std::abs(pex - mq.dot(ph)), rp);
      p_den += w * std::pow(std::abs(pex), rp);

      Eigen::Matrix2d e_h;
      e_h << he(0), he(2), he(2), he(1);
      const Eigen::Matrix2d sig_ex = stress(e_ex, x, params);
      s_num += w * std::pow((sig_ex - stress(e_h, x, params)).norm(), rp);
      s_den += w * std::pow(sig_ex.norm(), rp);
    }

    const Eigen::VectorXd ui = interpolate(ops, exact.u);
    const double hr = std::pow(ops.geometry().diameter, 2.0 - r);
    tri_num += hr * std::pow((ops.stab_projector() * (ui - uh)).norm(), r);
    tri_den += hr * std::pow((ops.stab_projector() * ui).norm(), r);
    trg_num += hr * std::pow((ops.stab_projector() * (ui - uh)).norm(), r);
    trg_den += hr * std::pow((ops.stab_projector() * ui).norm(), r);
  }
  auto ratio = [](double num, double den, double power) {
    const double n = std::pow(num, 1.0 / power);
    const double d = std::pow(den, 1.0 / power);
    return d > 0.0 ? n / d : n;
  };
  trg_num += w_num;
  trg_den += w_den;
  ErrorQuantities e;
  e.u_triple = ratio(tri_num, tri_den, r);
  e.u_triple_grad = ratio(trg_num, trg_den, r);
  e.u_w1r = ratio(w_num, w_den, r);
  e.p = exact.zero_pressure ? std::pow(p_num, 1.0 / rp) : ratio(p_num, p_den, rp);
  e.sigma = ratio(s_num, s_den, rp);
  return e;
}

double aeoc(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size()) throw UsageError("aeoc: errors and mesh sizes differ in length");
  if (errors.size() < 2) throw UsageError("aeoc: at least two levels are required");
  double sum = 0.0;
  for (std::size_t n = 1; n < errors.size(); ++n) {
    if (!(errors[n - 1] > 0.0) || !(errors[n] > 0.0)) throw UsageError("aeoc: errors must be positive");
    if (!(hs[n] < hs[n - 1]) || !(hs[n] > 0.0)) throw UsageError("aeoc: mesh sizes must be positive and decreasing");
    sum += std::log(errors[n - 1] / errors[n]) / std::log(hs[n - 1] / hs[n]);
  }
  return sum / static_cast<double>(errors.size() - 1);
}

double max_divergence(const Discretization& disc, const Eigen::VectorXd& u) {
  double worst = 0.0;
  for (int c = 0; c < disc.num_cells(); ++c) {
    const auto& ops = disc.ops(c);
    const Eigen::VectorXd dc = ops.div_coeffs() * disc.gather(u, c);
    worst = std::max(worst, (ops.assembly_basis_km1() * dc).cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace {

SparseMatrix pressure_mass(const Discretization& disc) {
  const auto& dm = disc.dofs();
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < disc.num_cells(); ++c) {
    const Eigen::MatrixXd& m = disc.ops(c).mass_km1();
    for (Eigen::Index a = 0; a < m.rows(); ++a)
      for (Eigen::Index b = 0; b < m.cols(); ++b)
        trips.emplace_back(dm.pressure_dof(c, static_cast<int>(a)), dm.pressure_dof(c, static_cast<int>(b)), m(a, b));
  }
  SparseMatrix m(dm.num_pressure(), dm.num_pressure());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

SparseMatrix energy_r2(const Discretization& disc) {
  const RheologyParams unit = RheologyParams::constant_viscosity(1.0, 2.0, 1.0);
  return picard_operator(disc, Eigen::VectorXd::Zero(disc.dofs().num_velocity()), unit,
                         std::vector<double>(static_cast<std::size_t>(disc.num_cells()), 1.0));
}

// Coefficients of the constant pressure 1.
Eigen::VectorXd constant_pressure(const Discretization& disc) {
  const auto& dm = disc.dofs();
  Eigen::VectorXd one = Eigen::VectorXd::Zero(dm.num_pressure());
  for (int c = 0; c < disc.num_cells(); ++c) one(dm.pressure_dof(c, 0)) = 1.0;
  return one;
}

} // namespace

InfSupResult infsup_estimate_r2(const Discretization& disc, int max_iters, double tol) {
  if (!disc.dofs().pure_dirichlet()) throw UsageError("inf-sup estimate requires a fully Dirichlet boundary");
  const SparseMatrix mass = pressure_mass(disc);
  const Eigen::VectorXd one = constant_pressure(disc);
  const double one_norm2 = one.dot(mass * one);
  SaddleSolver saddle(disc, Eigen::VectorXd::Zero(disc.dofs().num_velocity()));
  saddle.factorize(energy_r2(disc));
  const Eigen::VectorXd zero_u = Eigen::VectorXd::Zero(disc.dofs().num_velocity());

  // T q = S^+ M q, with S = B A^-1 B^T, self-adjoint in the M inner product on
  // zero-mean pressures. Its largest eigenvalue is 1 / beta^2.
  auto apply_t = [&](const Eigen::VectorXd& q) {
    const Eigen::VectorXd rhs = -(mass * q);
    return saddle.solve_factored(zero_u, &rhs).p;
  };
  auto project = [&](Eigen::VectorXd& v) { v -= (one.dot(mass * v) / one_norm2) * one; };
  auto mnorm = [&](const Eigen::VectorXd& v) { return std::sqrt(v.dot(mass * v)); };

  const int n = disc.dofs().num_pressure();
  Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0);
  for (int i = 0; i < n; ++i) q(i) += std::sin(1.7 * i);
  project(q);
  q /= mnorm(q);
  std::vector<Eigen::VectorXd> basis{q};
  std::vector<double> alpha, beta;
  InfSupResult res;
  double previous = 0.0;
  const int limit = std::min(max_iters, n - 1);
  for (int j = 0; j < limit; ++j) {
    Eigen::VectorXd w = apply_t(basis.back());
    project(w);
    alpha.push_back(basis.back().dot(mass * w));
    for (const auto& v : basis) w -= v.dot(mass * w) * v;
    for (const auto& v : basis) w -= v.dot(mass * w) * v;
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) t(i, i) = alpha[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    const double theta = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    res.iterations = m;
    res.beta = 1.0 / std::sqrt(theta);
    const double bnorm = mnorm(w);
    if (std::abs(theta - previous) <= tol * theta || bnorm <= tol * theta) break;
    previous = theta;
    beta.push_back(bnorm);
    basis.push_back(w / bnorm);
  }
  return res;
}

double infsup_dense(const Discretization& disc, bool zero_mean) {
  const auto& dm = disc.dofs();
  const auto& mask = dm.dirichlet_mask();
  std::vector<int> free;
  for (int i = 0; i < dm.num_velocity(); ++i)
    if (!mask[static_cast<std::size_t>(i)]) free.push_back(i);
  const Eigen::MatrixXd a_full = Eigen::MatrixXd(energy_r2(disc));
  const Eigen::MatrixXd b_full = Eigen::MatrixXd(assemble_b(disc));
  const int nf = static_cast<int>(free.size());
  Eigen::MatrixXd a(nf, nf), b(dm.num_pressure(), nf);
  for (int i = 0; i < nf; ++i) {
    b.col(i) = b_full.col(free[static_cast<std::size_t>(i)]);
    for (int j = 0; j < nf; ++j) a(i, j) = a_full(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
  }
  Eigen::MatrixXd s = b * a.ldlt().solve(b.transpose());
  Eigen::MatrixXd m = Eigen::MatrixXd(pressure_mass(disc));
  if (zero_mean) {
    // Orthonormal basis of the complement of the mean weights c = M 1.
    const Eigen::VectorXd c = m * constant_pressure(disc);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
    const Eigen::MatrixXd qm = qr.householderQ();
    const Eigen::MatrixXd z = qm.rightCols(c.size() - 1);
    s = z.transpose() * s * z;
    m = z.transpose() * m * z;
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(s, m, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
}

} // namespace vemnn
