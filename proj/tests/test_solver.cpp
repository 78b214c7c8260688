#include "vemnn/analysis.hpp"
#include "vemnn/solver.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

using namespace vemnn;

namespace {

const Box unit{0.0, 1.0, 0.0, 1.0};

struct Problem {
  Discretization disc;
  RheologyParams params;
  ExactSolution exact;
  Eigen::VectorXd rhs;
  Eigen::VectorXd dirichlet;

  Problem(PolygonalMesh mesh, int test, double r, double delta)
      : disc(std::move(mesh)),
        params(RheologyParams::constant_viscosity(1.0, r, delta)),
        exact(make_exact_solution(test, r)) {
    if (!exact.zero_pressure) exact = with_zero_mean_pressure(exact, disc);
    rhs = assemble_rhs(disc, forcing_field(exact, params));
    dirichlet = dirichlet_values(disc, exact.u);
  }
};

// The saddle system with the zero-mean multiplier kept as a bordered row,
// solved densely.
DiscreteState bordered_dense_solve(const Discretization& disc, const SparseMatrix& a, const Eigen::VectorXd& rhs,
                                   const Eigen::VectorXd& dirichlet) {
  const auto& mask = disc.dofs().dirichlet_mask();
  const int nv = disc.dofs().num_velocity(), np = disc.dofs().num_pressure();
  std::vector<int> free;
  for (int i = 0; i < nv; ++i)
    if (!mask[static_cast<std::size_t>(i)]) free.push_back(i);
  const int nf = static_cast<int>(free.size());
  const Eigen::MatrixXd ad = Eigen::MatrixXd(a), bd = Eigen::MatrixXd(assemble_b(disc));
  const Eigen::VectorXd c = pressure_mean_weights(disc);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nf + np + 1, nf + np + 1);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(nf + np + 1);
  const Eigen::VectorXd lift_a = ad * dirichlet, lift_b = bd * dirichlet;
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nf; ++j) k(i, j) = ad(free[i], free[j]);
    for (int q = 0; q < np; ++q) k(i, nf + q) = k(nf + q, i) = bd(q, free[i]);
    f(i) = rhs(free[i]) - lift_a(free[i]);
  }
  for (int q = 0; q < np; ++q) {
    k(nf + q, nf + np) = k(nf + np, nf + q) = c(q);
    f(nf + q) = -lift_b(q);
  }
  const Eigen::VectorXd x = k.fullPivLu().solve(f);
  DiscreteState s;
  s.u = dirichlet;
  for (int i = 0; i < nf; ++i) s.u(free[i]) = x(i);
  s.p = x.segment(nf, np);
  s.lambda = x(nf + np);
  return s;
}

} // namespace

TEST(Solver, PinnedSolveEqualsBorderedSystem) {
  Problem pb(generate_family(MeshFamily::voronoi, 3, unit, 5), 1, 2.0, 1.0);
  const SparseMatrix a =
      picard_operator(pb.disc, Eigen::VectorXd::Zero(pb.dirichlet.size()), pb.params, mean_viscosity(pb.disc, pb.params));
  SaddleSolver solver(pb.disc, pb.dirichlet);
  const DiscreteState got = solver.solve(a, pb.rhs);
  const DiscreteState ref = bordered_dense_solve(pb.disc, a, pb.rhs, pb.dirichlet);
  EXPECT_NEAR((got.u - ref.u).norm(), 0.0, 1e-10 * ref.u.norm());
  EXPECT_NEAR((got.p - ref.p).norm(), 0.0, 1e-10 * ref.p.norm());
  EXPECT_NEAR(got.lambda, ref.lambda, 1e-10);
  EXPECT_LE(solver.last_residual(), 1e-11);
  EXPECT_NEAR(pressure_mean_weights(pb.disc).dot(got.p), 0.0, 1e-12);
}

TEST(Solver, GradientForcingIsBalancedByPressure) {
  // f = grad(phi) with phi linear and u = 0 on the boundary: the exact solution
  // u = 0, p = phi - mean(phi) lies in the discrete spaces.
  const Discretization disc(generate_family(MeshFamily::voronoi, 4, unit, 8));
  const RheologyParams params = RheologyParams::constant_viscosity(1.0, 2.0, 1.0);
  const VectorField f = [](const Point&) { return Eigen::Vector2d(3.0, -2.0); };
  const Eigen::VectorXd rhs = assemble_rhs(disc, f);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(disc.dofs().num_velocity());
  const SolveResult res = two_stage_solve(disc, params, rhs, zero, SolverConfig{});
  EXPECT_LE(res.state.u.norm(), 1e-12);
  for (int c = 0; c < disc.num_cells(); ++c) {
    const auto& ops = disc.ops(c);
    const MonomialBasis b = ops.basis(1);
    const Point x = ops.geometry().centroid + Point(0.01, 0.02);
    const Eigen::Vector3d coeffs(res.state.p(disc.dofs().pressure_dof(c, 0)), res.state.p(disc.dofs().pressure_dof(c, 1)),
                                 res.state.p(disc.dofs().pressure_dof(c, 2)));
    EXPECT_NEAR(b.eval_poly(coeffs, x), 3.0 * x.x() - 2.0 * x.y() - 0.5, 1e-11);
  }
}

TEST(Solver, PatchTestAtRTwo) {
  for (MeshFamily f : {MeshFamily::quad, MeshFamily::voronoi}) {
    Problem pb(generate_family(f, 4, unit, 2), 2, 2.0, 1.0);
    const SolveResult res = two_stage_solve(pb.disc, pb.params, pb.rhs, pb.dirichlet, SolverConfig{});
    ASSERT_TRUE(res.converged);
    const ErrorQuantities e = error_quantities(pb.disc, res.state, pb.exact, pb.params);
    EXPECT_LE(e.u_triple, 1e-10);
    EXPECT_LE(e.u_w1r, 1e-10);
    EXPECT_LE(e.p, 1e-10);
    EXPECT_LE(e.sigma, 1e-10);
    const auto mu = mean_viscosity(pb.disc, pb.params);
    const MomentumResidual rr = residual(pb.disc, res.state.u, res.state.p, pb.params, mu, pb.rhs);
    EXPECT_LE(rr.momentum.norm(), 1e-10 * pb.rhs.norm());
    EXPECT_LE(rr.mass.norm(), 1e-10 * pb.rhs.norm());
  }
}

TEST(Solver, PicardConvergesToNonlinearSolution) {
  for (double delta : {0.0, 1.0}) {
    Problem pb(generate_family(MeshFamily::quad, 4, unit), 1, 2.5, delta);
    SolverConfig cfg;
    const SolveResult res = two_stage_solve(pb.disc, pb.params, pb.rhs, pb.dirichlet, cfg);
    ASSERT_TRUE(res.converged);
    // The linear r = 2 solve, then the intermediate and the target exponent.
    ASSERT_EQ(res.stages.size(), 3u);
    EXPECT_DOUBLE_EQ(res.stages[0].r, 2.0);
    EXPECT_DOUBLE_EQ(res.stages[1].r, 2.25);
    EXPECT_DOUBLE_EQ(res.stages[2].r, 2.5);
    EXPECT_LE(res.stages[2].increments.back(), cfg.picard_tol);
    const auto mu = mean_viscosity(pb.disc, pb.params);
    const MomentumResidual rr = residual(pb.disc, res.state.u, res.state.p, pb.params, mu, pb.rhs);
    EXPECT_LE(rr.momentum.norm(), 10 * cfg.picard_tol * pb.rhs.norm());
    EXPECT_LE(max_divergence(pb.disc, res.state.u), 1e-10 * discrete_norm(pb.disc, res.state.u, 2.5));
  }
}

TEST(Solver, RelaxationResolvesTheNeutralCycle) {
  Problem pb(generate_family(MeshFamily::cartesian, 4, Box{-1, 1, -1, 1}), 3, 3.0, 0.0);
  SolverConfig plain;
  plain.stagnation_relaxation = false;
  plain.picard_max_iters = 60;
  const SolveResult cyc = two_stage_solve(pb.disc, pb.params, pb.rhs, pb.dirichlet, plain);
  EXPECT_FALSE(cyc.converged);
  const SolveResult res = two_stage_solve(pb.disc, pb.params, pb.rhs, pb.dirichlet, SolverConfig{});
  EXPECT_TRUE(res.converged);
  EXPECT_GE(res.stages.back().relaxed_from, 0);
  EXPECT_DOUBLE_EQ(res.stages.back().relaxation, 0.5);
}

TEST(Solver, SlowContractionTriggersRelaxation) {
  // delta = 1, r = 3 with |eps| between 3 and 7: plain Picard contracts at
  // about 0.89 per step and exhausts a 100-iteration budget.
  Problem pb(generate_family(MeshFamily::quad, 4, unit), 2, 3.0, 1.0);
  SolverConfig plain;
  plain.stagnation_relaxation = false;
  EXPECT_FALSE(two_stage_solve(pb.disc, pb.params, pb.rhs, pb.dirichlet, plain).converged);
  const SolveResult res = two_stage_solve(pb.disc, pb.params, pb.rhs, pb.dirichlet, SolverConfig{});
  ASSERT_TRUE(res.converged);
  EXPECT_GE(res.stages.back().relaxed_from, 0);
  EXPECT_LE(res.stages.back().iterations(), 40);
}

TEST(Solver, RTwoIsASingleLinearSolve) {
  Problem pb(generate_family(MeshFamily::quad, 3, unit), 1, 2.0, 0.0);
  const SolveResult res = two_stage_solve(pb.disc, pb.params, pb.rhs, pb.dirichlet, SolverConfig{});
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.total_iterations(), 1);
}

TEST(Solver, ConfigValidation) {
  SolverConfig c;
  c.picard_tol = 0.0;
  EXPECT_THROW(c.check(), UsageError);
  c = SolverConfig{};
  c.picard_max_iters = 0;
  EXPECT_THROW(c.check(), UsageError);
  c = SolverConfig{};
  c.stagnation_ratio = 1.5;
  EXPECT_THROW(c.check(), UsageError);
}
