#include "vemnn/analysis.hpp"
#include "vemnn/properties.hpp"
#include "vemnn/study.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace vemnn;

namespace {

py::dict errors_dict(const ErrorQuantities& e) {
  py::dict d;
  d["u_triple"] = e.u_triple;
  d["u_w1r"] = e.u_w1r;
  d["p"] = e.p;
  d["sigma"] = e.sigma;
  return d;
}

py::dict case_dict(const CaseResult& c) {
  py::dict d;
  d["test"] = c.spec.test;
  d["family"] = to_string(c.spec.family);
  d["level"] = c.spec.level;
  d["h"] = c.h;
  d["n_cells"] = c.n_cells;
  d["r"] = c.spec.r;
  d["delta"] = c.spec.delta;
  d["errors"] = errors_dict(c.errors);
  d["picard_iters"] = c.picard_iters;
  d["converged"] = c.converged;
  d["max_divergence"] = c.max_divergence;
  return d;
}

py::dict solve_case(int test, const std::string& family, int level, double r, double delta, double alpha,
                    std::uint64_t seed, double tol) {
  CaseSpec spec;
  spec.test = test;
  spec.family = mesh_family_from_string(family);
  spec.level = level;
  spec.r = r;
  spec.delta = delta;
  spec.alpha = alpha;
  spec.seed = seed;
  SolverConfig cfg;
  cfg.picard_tol = tol;
  cfg.check();
  CaseResult res;
  {
    py::gil_scoped_release release;
    res = run_case(spec, cfg);
  }
  py::dict d = case_dict(res);
  d["u"] = res.solve.state.u;
  d["p"] = res.solve.state.p;
  return d;
}

py::dict study(int test, const std::string& family, const std::vector<int>& levels, const std::vector<double>& rs,
               const std::vector<double>& deltas, std::uint64_t seed, int jobs) {
  StudyConfig cfg;
  cfg.test = test;
  cfg.family = mesh_family_from_string(family);
  cfg.levels = levels;
  cfg.rs = rs;
  cfg.deltas = deltas;
  cfg.seed = seed;
  cfg.jobs = resolve_jobs(jobs > 0 ? std::optional<int>(jobs) : std::nullopt);
  StudyReport report;
  {
    py::gil_scoped_release release;
    report = convergence_study(cfg);
  }
  py::list rows, rates;
  for (const auto& c : report.rows) rows.append(case_dict(c));
  for (const auto& a : report.aeoc) {
    py::dict d;
    d["r"] = a.r;
    d["delta"] = a.delta;
    d["u_triple"] = a.u_triple;
    d["u_w1r"] = a.u_w1r;
    d["p"] = a.p;
    d["sigma"] = a.sigma;
    rates.append(d);
  }
  std::ostringstream csv;
  write_csv(csv, report);
  py::dict out;
  out["rows"] = rows;
  out["aeoc"] = rates;
  out["csv"] = csv.str();
  return out;
}

py::list verify(long samples, std::uint64_t seed, bool include_solves) {
  PropertyOptions opt;
  opt.assumption_samples = samples;
  opt.monotonicity_samples = std::max(1L, samples / 10);
  opt.norm_samples = std::max(1L, samples / 100);
  opt.seed = seed;
  opt.include_solves = include_solves;
  PropertyReport report;
  {
    py::gil_scoped_release release;
    report = run_property_suite(opt);
  }
  py::list out;
  for (const auto& r : report.results) {
    py::dict d;
    d["name"] = r.name;
    d["passed"] = r.passed;
    d["checked"] = r.checked;
    d["violations"] = r.violations;
    d["worst"] = r.worst;
    d["replay_seed"] = r.replay_seed;
    out.append(d);
  }
  return out;
}

py::dict mesh_info(const std::string& family, int level, std::vector<double> domain, std::uint64_t seed) {
  if (domain.size() != 4) throw UsageError("domain needs four values a, b, c, d");
  const PolygonalMesh mesh =
      generate_family(mesh_family_from_string(family), level, Box{domain[0], domain[1], domain[2], domain[3]}, seed);
  Eigen::MatrixXd xy(mesh.num_vertices(), 2);
  for (int v = 0; v < mesh.num_vertices(); ++v) xy.row(v) = mesh.vertices()[static_cast<std::size_t>(v)].transpose();
  py::dict d;
  d["vertices"] = xy;
  d["cells"] = mesh.cells();
  d["num_edges"] = mesh.num_edges();
  d["checksum"] = mesh_checksum(mesh);
  return d;
}

} // namespace

PYBIND11_MODULE(_vemnn, m) {
  m.doc() = "Divergence-free virtual elements for generalized Newtonian Stokes flow";
  py::register_exception<Error>(m, "VemnnError", PyExc_RuntimeError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);

  m.def("version", &version);
  m.def("mesh", &mesh_info, py::arg("family"), py::arg("level"),
        py::arg("domain") = std::vector<double>{0.0, 1.0, 0.0, 1.0}, py::arg("seed") = 1);
  m.def("solve", &solve_case, py::arg("test"), py::arg("family"), py::arg("level"), py::arg("r"), py::arg("delta"),
        py::arg("alpha") = 2.0, py::arg("seed") = 1, py::arg("tol") = 1e-10);
  m.def("convergence", &study, py::arg("test"), py::arg("family"), py::arg("levels"), py::arg("r"), py::arg("delta"),
        py::arg("seed") = 1, py::arg("jobs") = 0);
  m.def("verify", &verify, py::arg("samples") = 10000, py::arg("seed") = 1, py::arg("include_solves") = false);
  m.def("aeoc", &aeoc, py::arg("errors"), py::arg("h"));
}
