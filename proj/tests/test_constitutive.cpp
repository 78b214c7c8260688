#include "vemnn/constitutive.hpp"
#include "vemnn/properties.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vemnn;

TEST(Constitutive, StressMatchesCarreauYasuda) {
  const RheologyParams p = RheologyParams::constant_viscosity(1.5, 2.7, 0.3, 1.4);
  Tensor2 eps;
  eps << 0.4, -0.2, -0.2, 1.1;
  const double nu = 1.5 * std::pow(std::pow(0.3, 1.4) + std::pow(eps.norm(), 1.4), 0.7 / 1.4);
  EXPECT_NEAR((stress(eps, Point::Zero(), p) - nu * eps).norm(), 0.0, 1e-14);
  EXPECT_NEAR(effective_viscosity(eps.norm(), 1.5, p), nu, 1e-14);
}

TEST(Constitutive, ViscosityDerivativeMatchesFiniteDifference) {
  for (double delta : {0.0, 0.5, 1.0}) {
    const RheologyParams p = RheologyParams::constant_viscosity(1.0, 3.2, delta, 2.0);
    const double s = 0.8, h = 1e-6;
    const double fd = (effective_viscosity(s + h, 1.0, p) - effective_viscosity(s - h, 1.0, p)) / (2 * h);
    EXPECT_NEAR(effective_viscosity_derivative(s, 1.0, p), fd, 1e-8);
  }
  EXPECT_EQ(effective_viscosity_derivative(0.0, 1.0, RheologyParams::constant_viscosity(1.0, 3.0, 0.0)), 0.0);
}

TEST(Constitutive, PowerLawAtZeroDelta) {
  const RheologyParams p = RheologyParams::constant_viscosity(1.0, 3.0, 0.0);
  Tensor2 eps;
  eps << 0.0, 2.0, 2.0, 0.0;
  // |eps| = 2 sqrt 2, sigma = |eps| eps.
  EXPECT_NEAR((stress(eps, Point::Zero(), p) - std::sqrt(8.0) * eps).norm(), 0.0, 1e-13);
  EXPECT_EQ(stress(Tensor2::Zero(), Point::Zero(), p).norm(), 0.0);
}

TEST(Constitutive, ConstantsReduceAtRTwo) {
  RheologyParams p = RheologyParams::constant_viscosity(1.0, 2.0, 0.5);
  p.mu_minus = 0.5;
  p.mu_plus = 3.0;
  const AssumptionConstants c = assumption_constants(p);
  EXPECT_DOUBLE_EQ(c.sigma_c, 3.0);
  EXPECT_DOUBLE_EQ(c.sigma_m, 0.25);
}

TEST(Constitutive, ParameterValidation) {
  EXPECT_THROW(RheologyParams::constant_viscosity(1.0, 1.5, 1.0).check(), UsageError);
  EXPECT_THROW(RheologyParams::constant_viscosity(1.0, 2.5, -0.1).check(), UsageError);
  EXPECT_THROW(RheologyParams::constant_viscosity(1.0, 2.5, 1.0, 0.0).check(), UsageError);
  EXPECT_THROW(RheologyParams::constant_viscosity(0.0, 2.5, 1.0).check(), UsageError);
  EXPECT_NO_THROW(RheologyParams::constant_viscosity(1.0, 2.0, 0.0).check());
}

TEST(Constitutive, SampledAssumptionInequalities) {
  const PropertyResult cont = check_assumption_continuity(20000, 11);
  const PropertyResult mono = check_assumption_monotonicity(20000, 12);
  EXPECT_TRUE(cont.passed) << cont.detail;
  EXPECT_TRUE(mono.passed) << mono.detail;
  EXPECT_EQ(cont.checked, 20000);
  // The bounds are not vacuous: the sampled ratios come close to them.
  EXPECT_GT(cont.worst, 0.5);
  EXPECT_GT(mono.worst, 0.25);
}
