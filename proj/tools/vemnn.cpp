#include "vemnn/properties.hpp"
#include "vemnn/study.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>

using namespace vemnn;

namespace {

enum ExitCode { exit_ok = 0, exit_usage = 1, exit_not_converged = 2, exit_property = 3 };

struct MeshArgs {
  std::string family;
  int level = 0;
  std::vector<double> domain{0.0, 1.0, 0.0, 1.0};
  std::uint64_t seed = 1;
  std::string out;
};

struct SolveArgs {
  std::string mesh;
  int test = 0;
  double r = 2.0;
  double delta = 1.0;
  double alpha = 2.0;
  std::optional<double> tol;
  std::string out;
  bool timestamp = false;
};

struct ConvergenceArgs {
  int test = 0;
  std::string family;
  std::vector<int> levels;
  std::vector<double> rs;
  std::vector<double> deltas;
  double alpha = 2.0;
  std::optional<double> tol;
  std::uint64_t seed = 1;
  std::optional<int> jobs;
  std::string out;
  bool timestamp = false;
};

struct VerifyArgs {
  long samples = 100000;
  std::uint64_t seed = 1;
  bool skip_solves = false;
  double stabilization_sign = 1.0;
  std::string out;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out.precision(17);
  return out;
}

int cmd_mesh(const MeshArgs& a) {
  if (a.level < 1) throw UsageError("--level must be >= 1");
  if (a.domain.size() != 4) throw UsageError("--domain needs four values a,b,c,d");
  const Box box{a.domain[0], a.domain[1], a.domain[2], a.domain[3]};
  if (!(box.x1 > box.x0) || !(box.y1 > box.y0)) throw UsageError("--domain must satisfy a < b and c < d");
  const PolygonalMesh mesh = generate_family(mesh_family_from_string(a.family), a.level, box, a.seed);
  nlohmann::ordered_json cfg;
  cfg["command"] = "mesh";
  cfg["family"] = a.family;
  cfg["level"] = a.level;
  cfg["domain"] = a.domain;
  cfg["seed"] = a.seed;
  // The reader ignores "meta"; the checksum covers the canonical mesh arrays.
  nlohmann::ordered_json doc = nlohmann::ordered_json::parse(mesh_to_json(mesh));
  char sum[20];
  std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(mesh_checksum(mesh)));
  doc["meta"] = {{"version", version()}, {"config", cfg}, {"mesh_checksum", sum}};
  if (a.out.empty()) {
    std::cout << doc.dump() << "\n";
  } else {
    open_output(a.out) << doc.dump() << "\n";
    std::cerr << "wrote " << mesh.num_cells() << " cells to " << a.out << "\n";
  }
  return exit_ok;
}

int cmd_solve(const SolveArgs& a) {
  if (a.test < 1 || a.test > 3) throw UsageError("--test must be 1, 2 or 3");
  PolygonalMesh mesh = read_mesh(a.mesh);
  const Box want = make_exact_solution(a.test, 2.0).domain;
  const Box got = mesh.bounding_box();
  const double tol = 1e-12 * std::max(want.width(), want.height());
  if (std::abs(got.x0 - want.x0) > tol || std::abs(got.x1 - want.x1) > tol || std::abs(got.y0 - want.y0) > tol ||
      std::abs(got.y1 - want.y1) > tol)
    throw UsageError("mesh does not cover the domain of test " + std::to_string(a.test));

  SolverConfig solver;
  if (a.tol) solver.picard_tol = *a.tol;
  solver.check();
  CaseSpec spec;
  spec.test = a.test;
  spec.level = 0;
  spec.r = a.r;
  spec.delta = a.delta;
  spec.alpha = a.alpha;

  const Discretization disc(std::move(mesh));
  const CaseResult res = run_case(disc, spec, solver);

  nlohmann::ordered_json cfg;
  cfg["command"] = "solve";
  cfg["mesh"] = a.mesh;
  cfg["test"] = a.test;
  cfg["r"] = a.r;
  cfg["delta"] = a.delta;
  cfg["alpha"] = a.alpha;
  cfg["picard_tol"] = solver.picard_tol;
  cfg["picard_max_iters"] = solver.picard_max_iters;

  std::ofstream csv = open_output(a.out);
  if (a.timestamp) csv << "# generated " << utc_timestamp() << "\n";
  write_csv_header_comments(csv, cfg.dump(), {{0, res.mesh_checksum}});
  csv << csv_columns << "\n";
  write_csv_rows(csv, {res}, "file");

  nlohmann::ordered_json state;
  state["version"] = version();
  state["config"] = cfg;
  state["converged"] = res.converged;
  state["picard_iters"] = res.picard_iters;
  state["u"] = std::vector<double>(res.solve.state.u.begin(), res.solve.state.u.end());
  state["p"] = std::vector<double>(res.solve.state.p.begin(), res.solve.state.p.end());
  state["lambda"] = res.solve.state.lambda;
  open_output(a.out + ".state.json") << state.dump() << "\n";

  std::printf("u_triple %.6e  u_w1r %.6e  p %.6e  sigma %.6e  iters %d  %s\n", res.errors.u_triple,
              res.errors.u_w1r, res.errors.p, res.errors.sigma, res.picard_iters,
              res.converged ? "converged" : "NOT CONVERGED");
  return res.converged ? exit_ok : exit_not_converged;
}

int cmd_convergence(const ConvergenceArgs& a) {
  StudyConfig cfg;
  cfg.test = a.test;
  cfg.family = mesh_family_from_string(a.family);
  cfg.levels = a.levels;
  cfg.rs = a.rs;
  cfg.deltas = a.deltas;
  cfg.alpha = a.alpha;
  cfg.seed = a.seed;
  if (a.tol) cfg.solver.picard_tol = *a.tol;
  cfg.jobs = resolve_jobs(a.jobs);
  cfg.check();

  const StudyReport report = convergence_study(cfg);
  std::ofstream csv = open_output(a.out);
  if (a.timestamp) csv << "# generated " << utc_timestamp() << "\n";
  write_csv(csv, report);

  for (const auto& row : report.rows)
    if (!row.converged)
      std::printf("level %d r=%g delta=%g did not converge\n", row.spec.level, row.spec.r, row.spec.delta);
  for (const auto& g : report.aeoc) {
    if (!g.u_w1r) continue;
    const ExpectedRates e = expected_rates(g.r);
    std::printf("AEOC r=%g delta=%g: u_triple %.4f  u_w1r %.4f  p %.4f  sigma %.4f  "
                "(2k/r^2 = %.4f, k/(r-1) = %.4f, 4/r = %.4f, 2)\n",
                g.r, g.delta, g.u_triple.value_or(NAN), g.u_w1r.value_or(NAN), g.p.value_or(NAN),
                g.sigma.value_or(NAN), e.two_k_over_r2, e.k_over_r_minus_1, e.four_over_r);
  }
  return report.all_converged() ? exit_ok : exit_not_converged;
}

int cmd_verify(const VerifyArgs& a) {
  if (a.samples < 1) throw UsageError("--samples must be positive");
  PropertyOptions opt;
  opt.assumption_samples = a.samples;
  opt.monotonicity_samples = std::max(1L, a.samples / 10);
  opt.norm_samples = std::max(1L, a.samples / 100);
  opt.seed = a.seed;
  opt.include_solves = !a.skip_solves;
  opt.stabilization_sign = a.stabilization_sign;
  const PropertyReport report = run_property_suite(opt);

  nlohmann::ordered_json j;
  j["version"] = version();
  j["samples"] = a.samples;
  j["seed"] = a.seed;
  j["passed"] = report.passed();
  for (const auto& r : report.results) {
    std::printf("%-4s %-40s checked %-7ld violations %-5ld worst %.3e%s%s\n", r.passed ? "ok" : "FAIL",
                r.name.c_str(), r.checked, r.violations, r.worst, r.detail.empty() ? "" : "  ", r.detail.c_str());
    if (!r.passed && r.replay_seed != 0)
      std::printf("     replay seed %llu\n", static_cast<unsigned long long>(r.replay_seed));
    j["properties"].push_back({{"name", r.name},
                               {"passed", r.passed},
                               {"checked", r.checked},
                               {"violations", r.violations},
                               {"worst", r.worst},
                               {"detail", r.detail},
                               {"replay_seed", r.replay_seed}});
  }
  if (!a.out.empty()) open_output(a.out) << j.dump(2) << "\n";
  return report.passed() ? exit_ok : exit_property;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Divergence-free virtual elements for generalized Newtonian Stokes flow"};
  app.set_version_flag("--version", version());
  app.set_config("--config", "", "TOML or INI file with option values; command line flags take precedence");
  app.require_subcommand(1);

  MeshArgs mesh;
  auto* m = app.add_subcommand("mesh", "Generate a mesh of one family");
  m->add_option("--family", mesh.family, "cartesian, quad or voronoi")->required();
  m->add_option("--level", mesh.level, "Cells per unit length")->required();
  m->add_option("--domain", mesh.domain, "Box a,b,c,d = [a,b] x [c,d]")->delimiter(',')->expected(4);
  m->add_option("--seed", mesh.seed, "Voronoi generator seed");
  m->add_option("--out", mesh.out, "Output file; stdout when omitted");

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve one test case on a mesh file");
  s->add_option("--mesh", solve.mesh, "Mesh file")->required();
  s->add_option("--test", solve.test, "Test id 1, 2 or 3")->required();
  s->add_option("--r", solve.r, "Power-law exponent, r >= 2")->required();
  s->add_option("--delta", solve.delta, "Carreau-Yasuda delta >= 0")->required();
  s->add_option("--alpha", solve.alpha, "Carreau-Yasuda alpha > 0");
  s->add_option("--tol", solve.tol, "Picard relative increment tolerance");
  s->add_option("--out", solve.out, "Result CSV; the state goes to <out>.state.json")->required();
  s->add_flag("--timestamp", solve.timestamp, "Add a generation time line to the CSV");

  ConvergenceArgs conv;
  auto* c = app.add_subcommand("convergence", "Run a convergence study and write the CSV table");
  c->add_option("--test", conv.test, "Test id 1, 2 or 3")->required();
  c->add_option("--family", conv.family, "cartesian, quad or voronoi")->required();
  c->add_option("--levels", conv.levels, "Comma separated levels")->delimiter(',')->required();
  c->add_option("--r", conv.rs, "Comma separated exponents")->delimiter(',')->required();
  c->add_option("--delta", conv.deltas, "Comma separated delta values")->delimiter(',')->required();
  c->add_option("--alpha", conv.alpha, "Carreau-Yasuda alpha > 0");
  c->add_option("--tol", conv.tol, "Picard relative increment tolerance");
  c->add_option("--seed", conv.seed, "Voronoi generator seed");
  c->add_option("--jobs", conv.jobs, "Worker threads; falls back to VEMNN_JOBS");
  c->add_option("--out", conv.out, "Output CSV")->required();
  c->add_flag("--timestamp", conv.timestamp, "Add a generation time line to the CSV");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Run the property suite");
  v->add_option("--samples", verify.samples,
                "Samples for the constitutive inequalities; the discrete checks use 1/10 and 1/100 of it");
  v->add_option("--seed", verify.seed, "Base seed");
  v->add_flag("--skip-solves", verify.skip_solves, "Skip the checks that run nonlinear solves");
  v->add_option("--stabilization-sign", verify.stabilization_sign, "Mutation fixture: -1 flips the stabilization")
      ->group("");
  v->add_option("--out", verify.out, "JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (m->parsed()) return cmd_mesh(mesh);
    if (s->parsed()) return cmd_solve(solve);
    if (c->parsed()) return cmd_convergence(conv);
    return cmd_verify(verify);
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_not_converged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }
}
