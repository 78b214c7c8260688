#pragma once

#include "vemnn/assembly.hpp"
#include "vemnn/exact.hpp"
#include "vemnn/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vemnn {

/// Relative errors of a discrete solution. err_p is absolute when the exact
/// pressure vanishes identically.
struct ErrorQuantities {
  double u_triple = 0.0;
  /// Diagnostic variant of u_triple: analytic grad u_ex against Pi0 grad u_h in
  /// the projection term, plus the interpolant DoF term.
  double u_triple_grad = 0.0;
  double u_w1r = 0.0;
  double p = 0.0;
  double sigma = 0.0;
};

ErrorQuantities error_quantities(const Discretization& disc, const DiscreteState& state, const ExactSolution& exact,
                                 const RheologyParams& params, int degree = 9);

/// DoF interpolant of the exact velocity over the whole mesh.
Eigen::VectorXd interpolate_global(const Discretization& disc, const VectorField& u);

/// Mean of successive log-ratio slopes. Throws UsageError with fewer than two
/// levels, non-decreasing h or non-positive errors.
double aeoc(const std::vector<double>& errors, const std::vector<double>& hs);

/// max over cells of |div u_h| at the assembly nodes.
double max_divergence(const Discretization& disc, const Eigen::VectorXd& u);

struct InfSupResult {
  double beta = 0.0;
  int iterations = 0;
};

/// Discrete inf-sup constant at r = 2: sqrt of the smallest eigenvalue of
/// B A^-1 B^T against the pressure mass matrix, on zero-mean pressures, with
/// A the r = 2 energy (Pi0 eps Gram plus stabilization, unit viscosity).
/// Computed by Lanczos on the inverse problem with full reorthogonalization.
InfSupResult infsup_estimate_r2(const Discretization& disc, int max_iters = 200, double tol = 1e-10);

/// Same quantity from a dense generalized eigenproblem (small meshes only).
/// With `zero_mean` false the constant pressure is kept and the result is 0.
double infsup_dense(const Discretization& disc, bool zero_mean = true);

} // namespace vemnn
