#include "vemnn/study.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#ifndef VEMNN_VERSION
#define VEMNN_VERSION "0.0.0"
#endif

namespace vemnn {

const char* const csv_columns =
    "test,family,level,h,n_cells,r,delta,err_u_triple,err_u_w1r,err_p,err_sigma,picard_iters,converged";

std::string version() { return VEMNN_VERSION; }

namespace {

Box test_domain(int test) { return make_exact_solution(test, 2.0).domain; }

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

CaseResult run_case(const Discretization& disc, const CaseSpec& spec, const SolverConfig& config) {
  const ExactSolution raw = make_exact_solution(spec.test, spec.r);
  const ExactSolution exact = raw.zero_pressure ? raw : with_zero_mean_pressure(raw, disc);
  RheologyParams params = RheologyParams::constant_viscosity(1.0, spec.r, spec.delta, spec.alpha);
  params.check();

  const Eigen::VectorXd rhs = assemble_rhs(disc, forcing_field(exact, params));
  const Eigen::VectorXd dirichlet = dirichlet_values(disc, exact.u);

  CaseResult out;
  out.spec = spec;
  out.h = disc.mesh().mesh_size();
  out.n_cells = disc.num_cells();
  out.mesh_checksum = mesh_checksum(disc.mesh());
  out.solve = two_stage_solve(disc, params, rhs, dirichlet, config);
  out.converged = out.solve.converged;
  out.picard_iters = out.solve.total_iterations();
  out.errors = error_quantities(disc, out.solve.state, exact, params);
  out.max_divergence = max_divergence(disc, out.solve.state.u);
  out.discrete_norm = discrete_norm(disc, out.solve.state.u, spec.r);
  return out;
}

CaseResult run_case(const CaseSpec& spec, const SolverConfig& config) {
  Discretization disc(generate_family(spec.family, spec.level, test_domain(spec.test), spec.seed));
  return run_case(disc, spec, config);
}

void StudyConfig::check() const {
  if (test < 1 || test > 3) throw UsageError("test id must be 1, 2 or 3");
  if (levels.empty()) throw UsageError("level list is empty");
  if (rs.empty()) throw UsageError("r list is empty");
  if (deltas.empty()) throw UsageError("delta list is empty");
  std::set<int> seen;
  for (int l : levels) {
    if (l < 1) throw UsageError("mesh level must be >= 1");
    if (!seen.insert(l).second) throw UsageError("mesh level " + std::to_string(l) + " listed twice");
  }
  for (double r : rs)
    if (!(r >= 2.0)) throw UsageError("r must be >= 2");
  for (double d : deltas)
    if (!(d >= 0.0)) throw UsageError("delta must be >= 0");
  if (!(alpha > 0.0)) throw UsageError("alpha must be positive");
  if (jobs < 1) throw UsageError("job count must be at least 1");
  solver.check();
}

const CaseResult& StudyReport::row(double r, double delta, int level) const {
  for (const auto& c : rows)
    if (c.spec.r == r && c.spec.delta == delta && c.spec.level == level) return c;
  throw UsageError("no study row for r=" + format_param(r) + " delta=" + format_param(delta) +
                   " level=" + std::to_string(level));
}

const AeocRow& StudyReport::aeoc_row(double r, double delta) const {
  for (const auto& a : aeoc)
    if (a.r == r && a.delta == delta) return a;
  throw UsageError("no AEOC row for r=" + format_param(r) + " delta=" + format_param(delta));
}

bool StudyReport::all_converged() const {
  return std::all_of(rows.begin(), rows.end(), [](const CaseResult& c) { return c.converged; });
}

AeocRow compute_aeoc(const std::vector<CaseResult>& rows, MeshFamily family, double r, double delta) {
  AeocRow a;
  a.family = family;
  a.r = r;
  a.delta = delta;
  std::vector<const CaseResult*> group;
  for (const auto& c : rows)
    if (c.converged && c.spec.family == family && c.spec.r == r && c.spec.delta == delta) group.push_back(&c);
  std::sort(group.begin(), group.end(), [](const CaseResult* x, const CaseResult* y) { return x->h > y->h; });
  if (group.size() < 2) return a;
  std::vector<double> hs;
  std::vector<double> tri, w1r, p, sig;
  for (const CaseResult* c : group) {
    hs.push_back(c->h);
    tri.push_back(c->errors.u_triple);
    w1r.push_back(c->errors.u_w1r);
    p.push_back(c->errors.p);
    sig.push_back(c->errors.sigma);
  }
  auto safe = [&hs](const std::vector<double>& e) -> std::optional<double> {
    if (std::any_of(e.begin(), e.end(), [](double v) { return !(v > 0.0); })) return std::nullopt;
    return aeoc(e, hs);
  };
  a.u_triple = safe(tri);
  a.u_w1r = safe(w1r);
  a.p = safe(p);
  a.sigma = safe(sig);
  return a;
}

StudyReport convergence_study(const StudyConfig& config) {
  config.check();
  StudyReport report;
  report.config = config;
  std::vector<int> levels = config.levels;
  std::sort(levels.begin(), levels.end());

  const Box domain = test_domain(config.test);
  std::vector<std::unique_ptr<Discretization>> discs(levels.size());
  std::vector<CaseSpec> specs;
  std::vector<std::size_t> disc_of;
  for (double r : config.rs)
    for (double d : config.deltas)
      for (std::size_t l = 0; l < levels.size(); ++l) {
        CaseSpec s;
        s.test = config.test;
        s.family = config.family;
        s.level = levels[l];
        s.r = r;
        s.delta = d;
        s.alpha = config.alpha;
        s.seed = config.seed;
        specs.push_back(s);
        disc_of.push_back(l);
      }

  std::vector<std::once_flag> built(levels.size());
  std::vector<std::optional<CaseResult>> results(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());
  std::atomic<std::size_t> next{0};
  // Largest meshes first so that the slowest cases start early.
  std::vector<std::size_t> order(specs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return specs[a].level > specs[b].level; });

  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= order.size()) return;
      const std::size_t i = order[k];
      try {
        const std::size_t l = disc_of[i];
        std::call_once(built[l], [&]() {
          discs[l] = std::make_unique<Discretization>(generate_family(config.family, levels[l], domain, config.seed));
        });
        results[i] = run_case(*discs[l], specs[i], config.solver);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(specs.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (auto& r : results) report.rows.push_back(std::move(*r));
  for (std::size_t l = 0; l < levels.size(); ++l) report.mesh_checksums.emplace_back(levels[l], mesh_checksum(discs[l]->mesh()));
  for (double r : config.rs)
    for (double d : config.deltas) report.aeoc.push_back(compute_aeoc(report.rows, config.family, r, d));
  return report;
}

ExpectedRates expected_rates(double r, int k) {
  ExpectedRates e;
  e.two_k_over_r2 = 2.0 * k / (r * r);
  e.k_over_r_minus_1 = k / (r - 1.0);
  e.four_over_r = 4.0 / r;
  return e;
}

int resolve_jobs(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw UsageError("--jobs must be at least 1");
    return *flag;
  }
  if (const char* env = std::getenv("VEMNN_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw UsageError("VEMNN_JOBS must be a positive integer");
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string config_json(const StudyConfig& config) {
  nlohmann::ordered_json j;
  j["test"] = config.test;
  j["family"] = to_string(config.family);
  j["levels"] = config.levels;
  j["r"] = config.rs;
  j["delta"] = config.deltas;
  j["alpha"] = config.alpha;
  j["seed"] = config.seed;
  j["picard_tol"] = config.solver.picard_tol;
  j["picard_max_iters"] = config.solver.picard_max_iters;
  j["continuation"] = config.solver.continuation;
  j["stagnation_relaxation"] = config.solver.stagnation_relaxation;
  return j.dump();
}

void write_csv_header_comments(std::ostream& out, const std::string& config,
                               const std::vector<std::pair<int, std::uint64_t>>& checksums) {
  out << "# vemnn " << version() << "\n";
  out << "# config " << config << "\n";
  out << "# mesh_checksum";
  for (const auto& [level, sum] : checksums) {
    char buf[40];
    std::snprintf(buf, sizeof buf, " %d:%016llx", level, static_cast<unsigned long long>(sum));
    out << buf;
  }
  out << "\n";
}

void write_csv_rows(std::ostream& out, const std::vector<CaseResult>& rows, const std::string& family_label) {
  for (const auto& c : rows) {
    out << c.spec.test << ',' << (family_label.empty() ? to_string(c.spec.family) : family_label) << ',' << c.spec.level << ',' << format_value(c.h) << ','
        << c.n_cells << ',' << format_param(c.spec.r) << ',' << format_param(c.spec.delta) << ','
        << format_value(c.errors.u_triple) << ',' << format_value(c.errors.u_w1r) << ',' << format_value(c.errors.p)
        << ',' << format_value(c.errors.sigma) << ',' << c.picard_iters << ',' << (c.converged ? "true" : "false")
        << "\n";
  }
}

void write_csv(std::ostream& out, const StudyReport& report) {
  write_csv_header_comments(out, config_json(report.config), report.mesh_checksums);
  out << csv_columns << "\n";
  write_csv_rows(out, report.rows);
  auto opt = [](const std::optional<double>& v) { return v ? format_value(*v) : std::string(); };
  for (const auto& a : report.aeoc) {
    if (!a.u_triple && !a.u_w1r && !a.p && !a.sigma) continue;
    out << "AEOC," << to_string(a.family) << ",,,," << format_param(a.r) << ',' << format_param(a.delta) << ','
        << opt(a.u_triple) << ',' << opt(a.u_w1r) << ',' << opt(a.p) << ',' << opt(a.sigma) << ",,\n";
  }
}

} // namespace vemnn
