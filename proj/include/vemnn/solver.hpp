#pragma once

#include "vemnn/assembly.hpp"

#include <memory>
#include <vector>

namespace vemnn {

struct SolverConfig {
  double picard_tol = 1e-10;
  int picard_max_iters = 100;
  bool continuation = true;
  double viscosity_floor = 1e-14;
  /// When an increment exceeds stagnation_ratio times the one two steps
  /// earlier, the remaining iterations of the stage use the relaxation
  /// U <- U + (U_new - U) / (r - 1). Plain Picard is neutral at delta = 0,
  /// r = 3 and cycles there, and contracts slowly wherever the power-law part
  /// of the viscosity dominates.
  bool stagnation_relaxation = true;
  double stagnation_ratio = 0.5;

  /// Throws UsageError on a non-positive tolerance or iteration budget.
  void check() const;
};

/// Velocity DoFs (Dirichlet entries included), pressure coefficients and the
/// zero-mean multiplier.
struct DiscreteState {
  Eigen::VectorXd u;
  Eigen::VectorXd p;
  double lambda = 0.0;
};

/// Saddle-point system [A B^T 0; B 0 c; 0 c^T 0] on the free velocity DoFs,
/// with Dirichlet values lifted to the right-hand side. The zero-mean
/// multiplier is eliminated by pinning one constant pressure coefficient and
/// shifting the result, which keeps the factorized matrix free of dense rows.
/// The sparsity pattern is analyzed once and reused across Picard iterations.
class SaddleSolver {
public:
  SaddleSolver(const Discretization& disc, Eigen::VectorXd dirichlet);
  ~SaddleSolver();
  SaddleSolver(const SaddleSolver&) = delete;
  SaddleSolver& operator=(const SaddleSolver&) = delete;

  DiscreteState solve(const SparseMatrix& a, const Eigen::VectorXd& rhs);

  /// Factorizes the system for velocity operator `a`; solve_factored then
  /// reuses it for any number of right-hand sides.
  void factorize(const SparseMatrix& a);
  /// Velocity right-hand side over all velocity DoFs; optional pressure
  /// right-hand side (the mass equations read B u + c lambda = rhs_p).
  DiscreteState solve_factored(const Eigen::VectorXd& rhs_u, const Eigen::VectorXd* rhs_p = nullptr);

  /// ||K x - b|| / ||b|| of the last solve.
  double last_residual() const { return last_residual_; }
  int system_size() const { return size_; }

private:
  const Discretization& disc_;
  Eigen::VectorXd dirichlet_;
  SparseMatrix b_;
  Eigen::VectorXd mean_weights_;
  std::vector<int> free_index_;  // velocity DoF -> free index or -1
  int num_free_ = 0;
  int size_ = 0;
  bool multiplier_ = true;
  int pinned_ = -1;
  double area_ = 0.0;
  struct Factorization;
  std::unique_ptr<Factorization> lu_;
  Eigen::Index analyzed_nnz_ = -1;
  SparseMatrix k_;
  Eigen::VectorXd lift_;
  double last_residual_ = 0.0;
};

DiscreteState solve_linear_saddle(const Discretization& disc, const SparseMatrix& a, const Eigen::VectorXd& rhs,
                                  const Eigen::VectorXd& dirichlet, double* relative_residual = nullptr);

struct PicardLog {
  double r = 2.0;
  std::vector<double> increments;  // |||U^{m+1} - U^m|||_r / |||U^{m+1}|||_r
  bool converged = false;
  double relaxation = 1.0;  // factor in use at the end of the stage
  int relaxed_from = -1;    // iteration count at which relaxation switched on
  int iterations() const { return static_cast<int>(increments.size()); }
};

struct SolveResult {
  DiscreteState state;
  std::vector<PicardLog> stages;
  bool converged = false;
  int total_iterations() const;
};

/// Fixed-point iteration U^{m+1} = solve(A(U^m)) at the exponent in `params`.
SolveResult picard_solve(SaddleSolver& saddle, const Discretization& disc, const RheologyParams& params,
                         const Eigen::VectorXd& rhs, const DiscreteState& init, const SolverConfig& config);

/// Linear Stokes solve, then Picard at the midpoint exponent (2 + r)/2 when
/// continuation is on, then Picard at r.
SolveResult two_stage_solve(const Discretization& disc, const RheologyParams& params, const Eigen::VectorXd& rhs,
                            const Eigen::VectorXd& dirichlet, const SolverConfig& config);

} // namespace vemnn
