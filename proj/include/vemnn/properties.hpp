#pragma once

#include "vemnn/assembly.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vemnn {

struct PropertyOptions {
  long assumption_samples = 100000;
  long monotonicity_samples = 10000;
  long norm_samples = 1000;
  std::uint64_t seed = 1;
  /// Include the checks that run nonlinear solves (divergence-free invariant).
  bool include_solves = true;
  /// Mutation fixture: -1 flips the sign of the sampled stabilization form.
  double stabilization_sign = 1.0;

  /// Throws UsageError on non-positive sample counts.
  void check() const;
};

struct PropertyResult {
  std::string name;
  bool passed = true;
  long checked = 0;
  long violations = 0;
  /// Largest lhs/rhs ratio (inequalities) or error (identities) seen.
  double worst = 0.0;
  std::string detail;
  /// Seed reproducing the first violation, 0 when none.
  std::uint64_t replay_seed = 0;
};

struct PropertyReport {
  std::vector<PropertyResult> results;
  bool passed() const;
  const PropertyResult& find(const std::string& name) const;
};

/// Local stabilization form S^E(u, w) on the orthogonal DoF vectors x = DOF((I - Pi0) u),
/// y = DOF((I - Pi0) w) of an element of diameter h.
double stabilization_form(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double h, double mu_bar,
                          const RheologyParams& params);

/// Largest ratio |S(u,w)| / ((delta^r + S(u,u))^((r-2)/(2r)) S(u,u)^(1/2) S(w,w)^(1/r)) found
/// by a coarse grid scan over r in [2, 3.5], delta in [0, 2], h in [1e-3, 1] and the
/// DoF magnitudes (mu = 1, alpha = 2, parallel x and y, which is the worst alignment).
double calibrate_three_term_constant();

/// Constant of the local three-term inequality, frozen from calibrate_three_term_constant
/// with a margin.
extern const double three_term_constant;

PropertyResult check_assumption_continuity(long samples, std::uint64_t seed);
PropertyResult check_assumption_monotonicity(long samples, std::uint64_t seed);
PropertyResult check_newtonian_reduction(std::uint64_t seed);
PropertyResult check_stabilization(long samples, std::uint64_t seed, double sign = 1.0);
PropertyResult check_three_term(long samples, std::uint64_t seed, double sign = 1.0);
PropertyResult check_ah_monotonicity(long samples, std::uint64_t seed);
PropertyResult check_norm_comparison(long samples, std::uint64_t seed);
PropertyResult check_projection_consistency();
PropertyResult check_divergence_free();
PropertyResult check_quadrature_exactness();
PropertyResult check_aeoc_identities(std::uint64_t seed);

PropertyReport run_property_suite(const PropertyOptions& options);

} // namespace vemnn
