#pragma once

#include "vemnn/analysis.hpp"
#include "vemnn/mesh.hpp"
#include "vemnn/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vemnn {

std::string version();

struct CaseSpec {
  int test = 1;
  MeshFamily family = MeshFamily::cartesian;
  int level = 4;
  double r = 2.0;
  double delta = 1.0;
  double alpha = 2.0;
  std::uint64_t seed = 1;
};

struct CaseResult {
  CaseSpec spec;
  double h = 0.0;
  int n_cells = 0;
  ErrorQuantities errors;
  int picard_iters = 0;
  bool converged = false;
  double max_divergence = 0.0;
  double discrete_norm = 0.0;
  std::uint64_t mesh_checksum = 0;
  SolveResult solve;
};

/// Solves one case on an existing discretization of the test domain.
CaseResult run_case(const Discretization& disc, const CaseSpec& spec, const SolverConfig& config);

/// Builds the family mesh for the spec and solves.
CaseResult run_case(const CaseSpec& spec, const SolverConfig& config);

struct StudyConfig {
  int test = 1;
  MeshFamily family = MeshFamily::cartesian;
  std::vector<int> levels{4, 8, 16, 32};
  std::vector<double> rs{2.0};
  std::vector<double> deltas{1.0};
  double alpha = 2.0;
  std::uint64_t seed = 1;
  SolverConfig solver;
  int jobs = 1;

  /// Throws UsageError on an unknown test id, empty lists, non-positive or
  /// repeated levels, r < 2 or delta < 0.
  void check() const;
};

struct AeocRow {
  MeshFamily family = MeshFamily::cartesian;
  double r = 2.0;
  double delta = 1.0;
  /// Missing when fewer than two converged levels are available.
  std::optional<double> u_triple, u_w1r, p, sigma;
};

struct StudyReport {
  StudyConfig config;
  /// Sorted by (r, delta, level).
  std::vector<CaseResult> rows;
  std::vector<AeocRow> aeoc;
  /// One checksum per level, in the order of config.levels (sorted).
  std::vector<std::pair<int, std::uint64_t>> mesh_checksums;

  const CaseResult& row(double r, double delta, int level) const;
  const AeocRow& aeoc_row(double r, double delta) const;
  bool all_converged() const;
};

/// Runs every (level, r, delta) case; rows are independent and are spread over
/// config.jobs worker threads. The result does not depend on the job count.
StudyReport convergence_study(const StudyConfig& config);

/// AEOC over the converged rows of one (r, delta) group.
AeocRow compute_aeoc(const std::vector<CaseResult>& rows, MeshFamily family, double r, double delta);

/// Reference rates printed next to measured AEOC: 2k/r^2, k/(r-1), 4/r, 2.
struct ExpectedRates {
  double two_k_over_r2 = 0.0;
  double k_over_r_minus_1 = 0.0;
  double four_over_r = 0.0;
  double two = 2.0;
};
ExpectedRates expected_rates(double r, int k = 2);

/// Job count from an explicit flag, else the VEMNN_JOBS environment variable,
/// else the available hardware parallelism.
int resolve_jobs(std::optional<int> flag);

/// Effective configuration as a single-line JSON object.
std::string config_json(const StudyConfig& config);

void write_csv_header_comments(std::ostream& out, const std::string& config,
                               const std::vector<std::pair<int, std::uint64_t>>& checksums);
/// `family_label` replaces the family name, e.g. for meshes read from a file.
void write_csv_rows(std::ostream& out, const std::vector<CaseResult>& rows, const std::string& family_label = {});
void write_csv(std::ostream& out, const StudyReport& report);

extern const char* const csv_columns;

} // namespace vemnn
