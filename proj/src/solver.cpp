#include "vemnn/solver.hpp"

#include <Eigen/UmfPackSupport>

#include <cmath>
#include <string>

namespace vemnn {

struct SaddleSolver::Factorization {
  Eigen::UmfPackLU<SparseMatrix> lu;
};

void SolverConfig::check() const {
  if (!(picard_tol > 0.0)) throw UsageError("Picard tolerance must be positive");
  if (picard_max_iters < 1) throw UsageError("Picard iteration budget must be at least 1");
  if (!(viscosity_floor >= 0.0)) throw UsageError("viscosity floor must be non-negative");
  if (!(stagnation_ratio > 0.0 && stagnation_ratio < 1.0)) throw UsageError("stagnation ratio must lie in (0, 1)");
}

int SolveResult::total_iterations() const {
  int n = 0;
  for (const auto& s : stages) n += s.iterations();
  return n;
}

SaddleSolver::SaddleSolver(const Discretization& disc, Eigen::VectorXd dirichlet)
    : disc_(disc), dirichlet_(std::move(dirichlet)), b_(assemble_b(disc)), mean_weights_(pressure_mean_weights(disc)),
      lu_(std::make_unique<Factorization>()) {
  const auto& dm = disc.dofs();
  const auto& mask = dm.dirichlet_mask();
  free_index_.assign(mask.size(), -1);
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) free_index_[i] = num_free_++;
  multiplier_ = dm.pure_dirichlet();
  size_ = num_free_ + dm.num_pressure();
  if (multiplier_) {
    pinned_ = num_free_ + dm.pressure_dof(0, 0);
    for (int c = 0; c < disc.num_cells(); ++c) area_ += mean_weights_(dm.pressure_dof(c, 0));
  }
}

SaddleSolver::~SaddleSolver() = default;

void SaddleSolver::factorize(const SparseMatrix& a) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros() + 2 * b_.nonZeros() + 1));
  lift_ = Eigen::VectorXd::Zero(size_);
  for (int col = 0; col < a.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      const int fr = free_index_[static_cast<std::size_t>(it.row())];
      const int fc = free_index_[static_cast<std::size_t>(it.col())];
      if (fr < 0) continue;
      if (fc >= 0)
        trips.emplace_back(fr, fc, it.value());
      else
        lift_(fr) -= it.value() * dirichlet_(it.col());
    }
  for (int col = 0; col < b_.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(b_, col); it; ++it) {
      const int fc = free_index_[static_cast<std::size_t>(it.col())];
      const int pr = num_free_ + static_cast<int>(it.row());
      if (fc >= 0) {
        if (pr == pinned_) continue;
        trips.emplace_back(pr, fc, it.value());
        trips.emplace_back(fc, pr, it.value());
      } else {
        lift_(pr) -= it.value() * dirichlet_(it.col());
      }
    }
  if (pinned_ >= 0) trips.emplace_back(pinned_, pinned_, 1.0);
  k_.resize(size_, size_);
  k_.setFromTriplets(trips.begin(), trips.end());
  k_.makeCompressed();

  if (analyzed_nnz_ != k_.nonZeros()) {
    lu_->lu.analyzePattern(k_);
    analyzed_nnz_ = k_.nonZeros();
  }
  lu_->lu.factorize(k_);
  if (lu_->lu.info() != Eigen::Success)
    throw SolverError("saddle-point factorization failed (status " + std::to_string(static_cast<int>(lu_->lu.info())) +
                      "); system size " + std::to_string(size_) + ", free velocity DoFs " + std::to_string(num_free_) +
                      ", pressure DoFs " + std::to_string(disc_.dofs().num_pressure()));
}

DiscreteState SaddleSolver::solve_factored(const Eigen::VectorXd& rhs_u, const Eigen::VectorXd* rhs_p) {
  const auto& dm = disc_.dofs();
  const int np = dm.num_pressure();
  Eigen::VectorXd b = lift_;
  for (int i = 0; i < dm.num_velocity(); ++i)
    if (free_index_[static_cast<std::size_t>(i)] >= 0) b(free_index_[static_cast<std::size_t>(i)]) += rhs_u(i);
  if (rhs_p) b.segment(num_free_, np) += *rhs_p;

  // With a pure Dirichlet boundary the constant pressure spans the kernel of
  // B^T. The multiplier takes up the incompatible part of the mass equations,
  // after which the pinned equation is implied by the others.
  double lambda = 0.0;
  if (pinned_ >= 0) {
    double total = 0.0;
    for (int c = 0; c < disc_.num_cells(); ++c) total += b(num_free_ + dm.pressure_dof(c, 0));
    lambda = total / area_;
    b.segment(num_free_, np) -= lambda * mean_weights_;
    b(pinned_) = 0.0;
  }
  Eigen::VectorXd x = lu_->lu.solve(b);
  if (!x.allFinite()) throw SolverError("saddle-point solve produced non-finite values");
  const double bn = b.norm();
  last_residual_ = bn > 0.0 ? (k_ * x - b).norm() / bn : (k_ * x - b).norm();

  DiscreteState s;
  s.u = dirichlet_;
  for (int i = 0; i < dm.num_velocity(); ++i)
    if (free_index_[static_cast<std::size_t>(i)] >= 0) s.u(i) = x(free_index_[static_cast<std::size_t>(i)]);
  s.p = x.segment(num_free_, np);
  if (pinned_ >= 0) {
    const double mean = mean_weights_.dot(s.p) / area_;
    for (int c = 0; c < disc_.num_cells(); ++c) s.p(dm.pressure_dof(c, 0)) -= mean;
  }
  s.lambda = lambda;
  return s;
}

DiscreteState SaddleSolver::solve(const SparseMatrix& a, const Eigen::VectorXd& rhs) {
  factorize(a);
  return solve_factored(rhs);
}

DiscreteState solve_linear_saddle(const Discretization& disc, const SparseMatrix& a, const Eigen::VectorXd& rhs,
                                  const Eigen::VectorXd& dirichlet, double* relative_residual) {
  SaddleSolver solver(disc, dirichlet);
  DiscreteState s = solver.solve(a, rhs);
  if (relative_residual) *relative_residual = solver.last_residual();
  return s;
}

SolveResult picard_solve(SaddleSolver& saddle, const Discretization& disc, const RheologyParams& params,
                         const Eigen::VectorXd& rhs, const DiscreteState& init, const SolverConfig& config) {
  const std::vector<double> mu_bar = mean_viscosity(disc, params);
  SolveResult result;
  result.state = init;
  PicardLog log;
  log.r = params.r;
  double omega = 1.0;
  for (int it = 0; it < config.picard_max_iters; ++it) {
    const SparseMatrix a = picard_operator(disc, result.state.u, params, mu_bar, config.viscosity_floor);
    DiscreteState next = saddle.solve(a, rhs);
    if (omega < 1.0) {
      next.u = result.state.u + omega * (next.u - result.state.u);
      next.p = result.state.p + omega * (next.p - result.state.p);
      next.lambda = result.state.lambda + omega * (next.lambda - result.state.lambda);
    }
    const double num = discrete_norm(disc, next.u - result.state.u, params.r);
    const double den = discrete_norm(disc, next.u, params.r);
    const double inc = den > 0.0 ? num / den : num;
    log.increments.push_back(inc);
    result.state = std::move(next);
    if (inc <= config.picard_tol) {
      log.converged = true;
      break;
    }
    const auto n = log.increments.size();
    if (config.stagnation_relaxation && omega == 1.0 && n >= 3 &&
        log.increments[n - 1] > config.stagnation_ratio * log.increments[n - 3]) {
      omega = 1.0 / (params.r - 1.0);
      log.relaxed_from = static_cast<int>(n);
    }
  }
  log.relaxation = omega;
  result.converged = log.converged;
  result.stages.push_back(std::move(log));
  return result;
}

SolveResult two_stage_solve(const Discretization& disc, const RheologyParams& params, const Eigen::VectorXd& rhs,
                            const Eigen::VectorXd& dirichlet, const SolverConfig& config) {
  params.check();
  config.check();
  SaddleSolver saddle(disc, dirichlet);

  RheologyParams linear = params;
  linear.r = 2.0;
  const SparseMatrix a0 = picard_operator(disc, Eigen::VectorXd::Zero(disc.dofs().num_velocity()), linear,
                                          mean_viscosity(disc, linear), config.viscosity_floor);
  SolveResult result;
  result.state = saddle.solve(a0, rhs);
  PicardLog stage0;
  stage0.r = 2.0;
  stage0.increments.push_back(0.0);
  stage0.converged = true;
  result.stages.push_back(stage0);
  result.converged = true;
  if (params.r == 2.0) return result;

  std::vector<double> exponents;
  if (config.continuation) exponents.push_back(0.5 * (2.0 + params.r));
  exponents.push_back(params.r);
  for (double r : exponents) {
    RheologyParams stage = params;
    stage.r = r;
    SolveResult s = picard_solve(saddle, disc, stage, rhs, result.state, config);
    result.state = std::move(s.state);
    result.stages.push_back(s.stages.front());
    result.converged = s.converged;
  }
  return result;
}

} // namespace vemnn
