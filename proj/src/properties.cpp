#include "vemnn/properties.hpp"

#include "vemnn/analysis.hpp"
#include "vemnn/study.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace vemnn {

const double three_term_constant = 1.1;

namespace {

// Relative slack for sampled inequalities, to absorb rounding in both sides.
constexpr double slack = 1e-10;

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Sampler {
  std::mt19937_64 rng;
  explicit Sampler(std::uint64_t s) : rng(s) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  double log_uniform(double lo_exp, double hi_exp) { return std::pow(10.0, uniform(lo_exp, hi_exp)); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng); }
  Tensor2 sym_tensor() {
    const double s = log_uniform(-3.0, 3.0);
    Tensor2 t;
    t(0, 0) = normal();
    t(1, 1) = normal();
    t(0, 1) = t(1, 0) = normal();
    return s * t;
  }
  Eigen::VectorXd vector(int n, double scale) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return scale * v;
  }
  /// r in [2, 3.5]; delta = 0 for a quarter of the samples, else in [0, 2].
  RheologyParams params(bool random_alpha) {
    const double r = uniform(2.0, 3.5);
    const double delta = uniform(0.0, 1.0) < 0.25 ? 0.0 : uniform(0.0, 2.0);
    const double alpha = random_alpha ? uniform(0.5, 4.0) : 2.0;
    return RheologyParams::constant_viscosity(1.0, r, delta, alpha);
  }
};

void record(PropertyResult& res, double ratio, std::uint64_t seed, const std::string& what) {
  ++res.checked;
  if (!std::isfinite(ratio)) ratio = std::numeric_limits<double>::infinity();
  res.worst = std::max(res.worst, ratio);
  if (ratio > 1.0 + slack) {
    if (res.violations == 0) {
      res.replay_seed = seed;
      res.detail = what;
    }
    ++res.violations;
    res.passed = false;
  }
}

std::string describe(const RheologyParams& p) {
  std::ostringstream s;
  s << "r=" << p.r << " delta=" << p.delta << " alpha=" << p.alpha;
  return s.str();
}

const std::vector<Discretization>& sample_meshes() {
  static const std::vector<Discretization> meshes = [] {
    std::vector<Discretization> m;
    const Box unit{0.0, 1.0, 0.0, 1.0};
    m.emplace_back(generate_family(MeshFamily::cartesian, 2, unit));
    m.emplace_back(generate_family(MeshFamily::quad, 3, unit));
    m.emplace_back(generate_family(MeshFamily::voronoi, 3, unit, 7));
    return m;
  }();
  return meshes;
}

/// Random DoF vector with zero Dirichlet entries.
Eigen::VectorXd interior_field(const Discretization& disc, Sampler& s, double scale) {
  Eigen::VectorXd v = s.vector(disc.dofs().num_velocity(), scale);
  const auto& mask = disc.dofs().dirichlet_mask();
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) v(static_cast<Eigen::Index>(i)) = 0.0;
  return v;
}

double three_term_ratio(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double h, double mu_bar,
                        const RheologyParams& p, double sign) {
  const double suw = std::abs(sign * stabilization_form(x, y, h, mu_bar, p));
  const double suu = sign * stabilization_form(x, x, h, mu_bar, p);
  const double sww = sign * stabilization_form(y, y, h, mu_bar, p);
  if (suu < 0.0 || sww < 0.0) return std::numeric_limits<double>::infinity();
  const double r = p.r;
  const double rhs = std::pow(std::pow(p.delta, r) + suu, (r - 2.0) / (2.0 * r)) * std::sqrt(suu) * std::pow(sww, 1.0 / r);
  if (rhs == 0.0) return suw == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return suw / rhs;
}

} // namespace

void PropertyOptions::check() const {
  if (assumption_samples < 1 || monotonicity_samples < 1 || norm_samples < 1)
    throw UsageError("sample counts must be positive");
}

bool PropertyReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const PropertyResult& r) { return r.passed; });
}

const PropertyResult& PropertyReport::find(const std::string& name) const {
  for (const auto& r : results)
    if (r.name == name) return r;
  throw UsageError("no property named " + name);
}

double stabilization_form(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double h, double mu_bar,
                          const RheologyParams& params) {
  return stabilization_coefficient(mu_bar, h, x.norm(), params) * x.dot(y);
}

double calibrate_three_term_constant() {
  double best = 0.0;
  const Eigen::VectorXd e = Eigen::VectorXd::Unit(2, 0);
  for (int ir = 0; ir <= 12; ++ir) {
    const double r = 2.0 + 0.125 * ir;
    for (double delta : {0.0, 0.01, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0}) {
      const RheologyParams p = RheologyParams::constant_viscosity(1.0, r, delta);
      for (int ih = 0; ih <= 12; ++ih) {
        const double h = std::pow(10.0, -3.0 + 0.25 * ih);
        for (int ia = 0; ia <= 32; ++ia)
          for (int ib = 0; ib <= 32; ++ib) {
            const double a = std::pow(10.0, -4.0 + 0.25 * ia);
            const double b = std::pow(10.0, -4.0 + 0.25 * ib);
            best = std::max(best, three_term_ratio(a * h * e, b * h * e, h, 1.0, p, 1.0));
          }
      }
    }
  }
  return best;
}

PropertyResult check_assumption_continuity(long samples, std::uint64_t seed) {
  PropertyResult res;
  res.name = "constitutive.holder_continuity";
  for (long i = 0; i < samples; ++i) {
    const std::uint64_t s = sample_seed(seed, static_cast<std::uint64_t>(i));
    Sampler g(s);
    const RheologyParams p = g.params(true);
    const Tensor2 t = g.sym_tensor(), e = g.sym_tensor();
    const AssumptionConstants c = assumption_constants(p);
    const Point x = Point::Zero();
    const double lhs = (stress(t, x, p) - stress(e, x, p)).norm();
    const double rhs = c.sigma_c *
                       std::pow(std::pow(p.delta, p.r) + std::pow(t.norm(), p.r) + std::pow(e.norm(), p.r),
                                (p.r - 2.0) / p.r) *
                       (t - e).norm();
    record(res, rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0), s, describe(p));
  }
  return res;
}

PropertyResult check_assumption_monotonicity(long samples, std::uint64_t seed) {
  PropertyResult res;
  res.name = "constitutive.strong_monotonicity";
  for (long i = 0; i < samples; ++i) {
    const std::uint64_t s = sample_seed(seed, static_cast<std::uint64_t>(i));
    Sampler g(s);
    const RheologyParams p = g.params(true);
    const Tensor2 t = g.sym_tensor(), e = g.sym_tensor();
    const AssumptionConstants c = assumption_constants(p);
    const Point x = Point::Zero();
    const double lhs = ((stress(t, x, p) - stress(e, x, p)).array() * (t - e).array()).sum();
    const double rhs = c.sigma_m *
                       std::pow(std::pow(p.delta, p.r) + std::pow(t.norm(), p.r) + std::pow(e.norm(), p.r),
                                (p.r - 2.0) / p.r) *
                       (t - e).squaredNorm();
    record(res, lhs > 0.0 ? rhs / lhs : INFINITY, s, describe(p));
  }
  return res;
}

PropertyResult check_newtonian_reduction(std::uint64_t seed) {
  PropertyResult res;
  res.name = "newtonian_reduction";
  Sampler g(seed);
  for (int i = 0; i < 1000; ++i) {
    const double mu = g.uniform(0.5, 3.0);
    const RheologyParams p = RheologyParams::constant_viscosity(mu, 2.0, g.uniform(0.0, 2.0), g.uniform(0.5, 4.0));
    const Tensor2 t = g.sym_tensor(), e = g.sym_tensor();
    const double err = (stress(t, Point::Zero(), p) - stress(e, Point::Zero(), p) - mu * (t - e)).norm() /
                       (mu * (t - e).norm());
    ++res.checked;
    res.worst = std::max(res.worst, err);
  }
  // The Picard operator at r = 2 must not depend on the linearization point.
  const Discretization& disc = sample_meshes()[2];
  const RheologyParams p = RheologyParams::constant_viscosity(1.0, 2.0, 0.0);
  const auto mu_bar = mean_viscosity(disc, p);
  const SparseMatrix a0 = picard_operator(disc, Eigen::VectorXd::Zero(disc.dofs().num_velocity()), p, mu_bar);
  for (int i = 0; i < 5; ++i) {
    const SparseMatrix a1 = picard_operator(disc, g.vector(disc.dofs().num_velocity(), 10.0), p, mu_bar);
    const double err = SparseMatrix(a1 - a0).norm() / a0.norm();
    ++res.checked;
    res.worst = std::max(res.worst, err);
  }
  res.passed = res.worst <= 1e-14;
  if (!res.passed) res.detail = "r = 2 stress or operator differs from the Newtonian one";
  return res;
}

PropertyResult check_stabilization(long samples, std::uint64_t seed, double sign) {
  PropertyResult res;
  res.name = "stabilization.monotonicity_continuity";
  const auto& meshes = sample_meshes();
  for (long i = 0; i < samples; ++i) {
    const std::uint64_t s = sample_seed(seed, static_cast<std::uint64_t>(i));
    Sampler g(s);
    const RheologyParams p = g.params(false);
    const Discretization& disc = meshes[static_cast<std::size_t>(i) % meshes.size()];
    const auto& ops = disc.ops(static_cast<int>(g.uniform(0.0, disc.num_cells() - 1e-9)));
    const double h = ops.geometry().diameter;
    const double mu_bar = 1.0;
    const int n = ops.num_dofs();
    const Eigen::MatrixXd& q = ops.stab_projector();
    const Eigen::VectorXd x = q * g.vector(n, h * g.log_uniform(-3.0, 3.0));
    const Eigen::VectorXd y = q * g.vector(n, h * g.log_uniform(-3.0, 3.0));
    const Eigen::VectorXd v = q * g.vector(n, h * g.log_uniform(-3.0, 3.0));
    const Eigen::VectorXd e = x - y;
    auto form = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      return sign * stabilization_form(a, b, h, mu_bar, p);
    };
    const AssumptionConstants c = assumption_constants(p);
    const double r = p.r;
    const double base = std::pow(p.delta, r) + std::pow(x.norm() / h, r) + std::pow(y.norm() / h, r);

    // Strong monotonicity against h^{2-r} |DOF(e)|^r through the vector form of
    // the law: sigma_m (|x|^r + |y|^r)^{(r-2)/r} >= sigma_m 2^{(1-r)(r-2)/r} |x - y|^{r-2}.
    const double gap = form(x, e) - form(y, e);
    const double lower = c.sigma_m * std::pow(2.0, (1.0 - r) * (r - 2.0) / r) * std::pow(h, 2.0 - r) *
                         std::pow(e.norm(), r);
    record(res, gap > 0.0 ? lower / gap : INFINITY, s, "monotonicity " + describe(p));

    // Hoelder continuity.
    const double diff = std::abs(form(x, v) - form(y, v));
    const double upper = c.sigma_c * mu_bar * std::pow(base, (r - 2.0) / r) * e.norm() * v.norm();
    record(res, upper > 0.0 ? diff / upper : 0.0, s, "continuity " + describe(p));

    // Lower bound S(v, v) >= mu delta^{r-2} |DOF(v)|^2.
    const double svv = form(v, v);
    const double floor = mu_bar * std::pow(p.delta, r - 2.0) * v.squaredNorm();
    record(res, svv > 0.0 ? floor / svv : (floor > 0.0 || svv < 0.0 ? INFINITY : 0.0), s, "lower bound " + describe(p));
  }
  return res;
}

PropertyResult check_three_term(long samples, std::uint64_t seed, double sign) {
  PropertyResult res;
  res.name = "stabilization.three_term";
  const auto& meshes = sample_meshes();
  for (long i = 0; i < samples; ++i) {
    const std::uint64_t s = sample_seed(seed, static_cast<std::uint64_t>(i));
    Sampler g(s);
    const RheologyParams p = g.params(false);
    const Discretization& disc = meshes[static_cast<std::size_t>(i) % meshes.size()];
    const auto& ops = disc.ops(static_cast<int>(g.uniform(0.0, disc.num_cells() - 1e-9)));
    const double h = ops.geometry().diameter;
    const Eigen::MatrixXd& q = ops.stab_projector();
    const Eigen::VectorXd x = q * g.vector(ops.num_dofs(), h * g.log_uniform(-3.0, 3.0));
    const Eigen::VectorXd y = q * g.vector(ops.num_dofs(), h * g.log_uniform(-3.0, 3.0));
    record(res, three_term_ratio(x, y, h, 1.0, p, sign) / three_term_constant, s, describe(p));
  }
  return res;
}

PropertyResult check_ah_monotonicity(long samples, std::uint64_t seed) {
  PropertyResult res;
  res.name = "a_h.strict_monotonicity";
  const auto& meshes = sample_meshes();
  double min_ratio = INFINITY;
  for (long i = 0; i < samples; ++i) {
    const std::uint64_t s = sample_seed(seed, static_cast<std::uint64_t>(i));
    Sampler g(s);
    const RheologyParams p = g.params(false);
    const Discretization& disc = meshes[static_cast<std::size_t>(i) % meshes.size()];
    const auto mu_bar = mean_viscosity(disc, p);
    const Eigen::VectorXd u = interior_field(disc, g, g.log_uniform(-2.0, 2.0));
    const Eigen::VectorXd w = interior_field(disc, g, g.log_uniform(-2.0, 2.0));
    const Eigen::VectorXd e = u - w;
    const double gap = (apply_nonlinear(disc, u, p, mu_bar) - apply_nonlinear(disc, w, p, mu_bar)).dot(e);
    ++res.checked;
    if (!(gap > 0.0)) {
      if (res.violations == 0) {
        res.replay_seed = s;
        res.detail = describe(p);
      }
      ++res.violations;
      res.passed = false;
    } else {
      min_ratio = std::min(min_ratio, gap / std::pow(error_measure(disc, e, p, mu_bar), p.r));
    }
  }
  res.worst = min_ratio;
  if (res.passed) {
    std::ostringstream d;
    d << "min gap / |||e|||_{delta,r}^r = " << min_ratio;
    res.detail = d.str();
  }
  return res;
}

PropertyResult check_norm_comparison(long samples, std::uint64_t seed) {
  PropertyResult res;
  res.name = "norm_comparison";
  for (const Discretization& disc : sample_meshes())
    for (long i = 0; i < samples; ++i) {
      const std::uint64_t s = sample_seed(seed, static_cast<std::uint64_t>(i) + 7919u * static_cast<std::uint64_t>(disc.num_cells()));
      Sampler g(s);
      const RheologyParams p = g.params(false);
      const auto mu_bar = mean_viscosity(disc, p);
      const Eigen::VectorXd v = g.vector(disc.dofs().num_velocity(), g.log_uniform(-3.0, 3.0));
      const double lhs = discrete_norm(disc, v, p.r);
      const double rhs = error_measure(disc, v, p, mu_bar);
      record(res, rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0), s, describe(p));
    }
  return res;
}

PropertyResult check_projection_consistency() {
  PropertyResult res;
  res.name = "projection_consistency";
  std::vector<PolygonalMesh> meshes;
  for (const Box& box : {Box{0.0, 1.0, 0.0, 1.0}, Box{-1.0, 1.0, -1.0, 1.0}})
    for (MeshFamily f : {MeshFamily::cartesian, MeshFamily::quad, MeshFamily::voronoi})
      meshes.push_back(generate_family(f, 4, box, 3));
  for (const auto& mesh : meshes) {
    const Discretization disc(mesh);
    for (int c = 0; c < disc.num_cells(); ++c) {
      const auto& ops = disc.ops(c);
      const MonomialBasis bk = ops.basis(ops.k());
      const int dk = bk.size();
      const int d1 = poly_dim(ops.k() - 1);
      const Eigen::MatrixXd dx = bk.derivative_matrix(0), dy = bk.derivative_matrix(1);
      for (int j = 0; j < 2 * dk; ++j) {
        const Eigen::VectorXd coeffs = Eigen::VectorXd::Unit(2 * dk, j);
        const Eigen::VectorXd dofs = dofs_of_polynomial(ops, coeffs);
        double err = (ops.pi_nabla() * dofs - coeffs).lpNorm<Eigen::Infinity>();
        err = std::max(err, (ops.pi0() * dofs - coeffs).lpNorm<Eigen::Infinity>());
        Eigen::VectorXd grad(4 * d1), div = Eigen::VectorXd::Zero(d1);
        for (int i = 0; i < 2; ++i) {
          const Eigen::VectorXd comp = coeffs.segment(i * dk, dk);
          grad.segment((2 * i) * d1, d1) = (dx * comp).head(d1);
          grad.segment((2 * i + 1) * d1, d1) = (dy * comp).head(d1);
          div += (i == 0 ? dx * comp : dy * comp).head(d1);
        }
        err = std::max(err, (ops.pi0_grad() * dofs - grad).lpNorm<Eigen::Infinity>() * ops.geometry().diameter);
        err = std::max(err, (ops.div_coeffs() * dofs - div).lpNorm<Eigen::Infinity>() * ops.geometry().diameter);
        err = std::max(err, (ops.stab_projector() * dofs).lpNorm<Eigen::Infinity>());
        ++res.checked;
        res.worst = std::max(res.worst, err);
        if (err > 1e-11) {
          if (res.violations == 0) res.detail = "cell " + std::to_string(c) + ", monomial " + std::to_string(j);
          ++res.violations;
          res.passed = false;
        }
      }
    }
  }
  return res;
}

PropertyResult check_divergence_free() {
  PropertyResult res;
  res.name = "divergence_free";
  const std::vector<CaseSpec> cases = {
      {1, MeshFamily::quad, 4, 2.5, 1.0, 2.0, 1},
      {2, MeshFamily::voronoi, 4, 2.25, 0.0, 2.0, 5},
      {3, MeshFamily::cartesian, 2, 3.0, 0.0, 2.0, 1},
  };
  for (const auto& spec : cases) {
    const CaseResult c = run_case(spec, SolverConfig{});
    const double rel = c.max_divergence / c.discrete_norm;
    ++res.checked;
    res.worst = std::max(res.worst, rel);
    if (!c.converged || rel > 1e-10) {
      ++res.violations;
      res.passed = false;
      res.detail = "test " + std::to_string(spec.test) + (c.converged ? "" : " did not converge");
    }
  }
  return res;
}

PropertyResult check_quadrature_exactness() {
  PropertyResult res;
  res.name = "quadrature_exactness";
  const Box unit{0.0, 1.0, 0.0, 1.0};
  for (MeshFamily f : {MeshFamily::quad, MeshFamily::voronoi}) {
    const PolygonalMesh mesh = generate_family(f, 3, unit, 11);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto& geo = mesh.geometry(c);
      std::vector<Point> loop;
      for (int v : mesh.cell(c)) loop.push_back(mesh.vertex(v));
      for (int degree = 0; degree <= 12; ++degree) {
        const QuadratureRule rule = polygon_rule(loop, geo, degree);
        const MonomialBasis basis(degree, geo.centroid, geo.diameter);
        const Eigen::MatrixXd vals = basis.eval(rule.nodes);
        // Oracle: int_E m_(a,b) = h / (a+1) * oint X^(a+1) Y^b dy (divergence theorem).
        const GaussRule1D& gl = gauss_legendre(degree / 2 + 2);
        for (int j = 0; j < basis.size(); ++j) {
          const auto [a, b] = monomial_exponent(j);
          double exact = 0.0;
          for (std::size_t i = 0; i < loop.size(); ++i) {
            const Point& p0 = loop[i];
            const Point& p1 = loop[(i + 1) % loop.size()];
            for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
              const Point x = basis.scaled(p0 + gl.nodes[q] * (p1 - p0));
              exact += gl.weights[q] * std::pow(x.x(), a + 1) * std::pow(x.y(), b) * (p1.y() - p0.y());
            }
          }
          exact *= geo.diameter / (a + 1);
          double approx = 0.0;
          for (std::size_t q = 0; q < rule.size(); ++q) approx += rule.weights[q] * vals(static_cast<Eigen::Index>(q), j);
          const double err = std::abs(approx - exact) / geo.area;
          ++res.checked;
          res.worst = std::max(res.worst, err);
          if (err > 1e-12) {
            if (res.violations == 0) res.detail = "cell " + std::to_string(c) + ", degree " + std::to_string(degree);
            ++res.violations;
            res.passed = false;
          }
        }
      }
    }
  }
  return res;
}

PropertyResult check_aeoc_identities(std::uint64_t seed) {
  PropertyResult res;
  res.name = "aeoc_identities";
  auto track = [&res](double err) {
    ++res.checked;
    res.worst = std::max(res.worst, err);
  };
  track(std::abs(aeoc({4.0, 2.0, 1.0}, {4.0, 2.0, 1.0}) - 1.0));
  track(std::abs(aeoc({16.0, 4.0, 1.0}, {0.4, 0.2, 0.1}) - 2.0));
  Sampler g(seed);
  for (int i = 0; i < 1000; ++i) {
    const int n = 2 + static_cast<int>(g.uniform(0.0, 4.0));
    std::vector<double> e(static_cast<std::size_t>(n)), h(static_cast<std::size_t>(n));
    double hv = g.uniform(0.5, 1.0);
    for (int k = 0; k < n; ++k) {
      h[static_cast<std::size_t>(k)] = hv;
      hv *= g.uniform(0.3, 0.9);
      e[static_cast<std::size_t>(k)] = g.log_uniform(-8.0, 0.0);
    }
    const double base = aeoc(e, h);
    const double ch = g.log_uniform(-3.0, 3.0), ce = g.log_uniform(-3.0, 3.0);
    std::vector<double> e2 = e, h2 = h;
    for (auto& v : e2) v *= ce;
    for (auto& v : h2) v *= ch;
    track(std::abs(aeoc(e2, h2) - base) / std::max(1.0, std::abs(base)));
  }
  res.passed = res.worst <= 1e-12;
  if (!res.passed) res.detail = "AEOC changed under rescaling";
  return res;
}

PropertyReport run_property_suite(const PropertyOptions& options) {
  options.check();
  PropertyReport report;
  const std::uint64_t s = options.seed;
  report.results.push_back(check_assumption_continuity(options.assumption_samples, s));
  report.results.push_back(check_assumption_monotonicity(options.assumption_samples, s + 1));
  report.results.push_back(check_newtonian_reduction(s + 2));
  report.results.push_back(check_stabilization(options.monotonicity_samples, s + 3, options.stabilization_sign));
  report.results.push_back(check_three_term(options.monotonicity_samples, s + 4, options.stabilization_sign));
  report.results.push_back(check_ah_monotonicity(options.monotonicity_samples, s + 5));
  report.results.push_back(check_norm_comparison(options.norm_samples, s + 6));
  report.results.push_back(check_projection_consistency());
  report.results.push_back(check_quadrature_exactness());
  report.results.push_back(check_aeoc_identities(s + 7));
  if (options.include_solves) report.results.push_back(check_divergence_free());
  return report;
}

} // namespace vemnn
