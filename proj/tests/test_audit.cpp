#include <cmath>

#include <gtest/gtest.h>

#include <stickyss/audit.hpp>

using namespace stickyss;

namespace {

SteadyResult fake_steady(double gamma, double m2) {
  Grid g(10, 256);
  SteadyResult r;
  r.profile = gaussian_profile(g, m2).with_meta(gamma, 0.25);
  r.m2 = m2;
  r.residual = 1e-9;
  r.converged = true;
  r.max_xG = 0.3;
  if (gamma > 0) r.i_gamma_identity = 5e-9;
  return r;
}

}  // namespace

TEST(CheckResult, MarginAndViolations) {
  CheckResult c{"x"};
  EXPECT_FALSE(c.passed());
  c.record(1.0, 2.0, 2.0);
  EXPECT_DOUBLE_EQ(c.worst_margin, 0.5);
  EXPECT_TRUE(c.passed());
  c.record(2.0, 1.9, 1.0, 0.2);
  EXPECT_TRUE(c.passed());
  c.record(2.0, 1.0, 1.0);
  EXPECT_EQ(c.violations, 1);
  EXPECT_EQ(c.samples, 3);
  EXPECT_FALSE(c.passed());
}

TEST(AuditReport, FindAndJson) {
  AuditReport r;
  CheckResult a{"a"}, b{"b"};
  a.record(0, 1, 1);
  r.checks = {a, b};
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.find("a").samples, 1);
  EXPECT_THROW(r.find("z"), std::out_of_range);
  json j = audit_json(r);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["worst_margin"], 1.0);
  EXPECT_TRUE(j[1]["worst_margin"].is_null());
}

TEST(AlphaDelta, WitnessIsAdmissible) {
  AlphaDeltaWitness w = find_alpha_delta(0.1);
  EXPECT_GT(w.lambda, 0.0);
  EXPECT_NEAR(w.alpha, 0.5 * w.lambda / 4, 1e-15);
  EXPECT_GT(w.delta, 0.0);
  EXPECT_LT(w.delta, 1.0);
  EXPECT_GE(w.boundary_margin, 0.0);
  // the margin stays nonnegative on [-delta, 1] for every m in range
  for (double m : {2.1, 2.4, 2.5, 2.7, 2.9})
    for (int i = 0; i <= 200; ++i) {
      double u = -w.delta + (1 + w.delta) * i / 200.0;
      EXPECT_GE(detail::alpha_delta_margin(u, m, w.alpha), -1e-14) << m << ' ' << u;
    }
  EXPECT_THROW(find_alpha_delta(0.6), std::invalid_argument);
}

TEST(Pointwise, AllInequalitiesHold) {
  AlphaDeltaWitness w;
  AuditReport r = audit_pointwise_inequalities(100000, 11, &w);
  ASSERT_EQ(r.checks.size(), 4u);
  for (const auto& c : r.checks) {
    EXPECT_TRUE(c.passed()) << c.name;
    EXPECT_EQ(c.samples, 100000);
  }
  EXPECT_GT(w.delta, 0.0);
  EXPECT_EQ(r.find("alpha_delta").parameters["delta"], w.delta);
  EXPECT_THROW(audit_pointwise_inequalities(10, 1), std::invalid_argument);
}

TEST(Pointwise, MidpointPowerExpansionIsTightWithOneArgumentZero) {
  for (double k : {0.5, 1.0, 2.5}) {
    double x = 1.7;
    EXPECT_NEAR(std::pow(0.5 * x, k), std::exp2(-k) * std::pow(x, k), 1e-15);
    double equal = std::exp2(-k) * 8 * std::pow(x, k);
    EXPECT_LT(std::pow(x, k), equal);
  }
}

TEST(OperatorBounds, SmallBatchPassesAndRepeats) {
  OperatorAuditOptions opt;
  opt.half_width = 10;
  opt.cell_count = 128;
  AuditReport a = audit_operator_bounds(50, 3, opt);
  AuditReport b = audit_operator_bounds(50, 3, opt);
  EXPECT_FALSE(a.checks.empty());
  for (const auto& c : a.checks) EXPECT_TRUE(c.passed()) << c.name << ' ' << c.worst_margin;
  EXPECT_EQ(audit_json(a).dump(), audit_json(b).dump());
  EXPECT_THROW(audit_operator_bounds(5, 3, opt), std::invalid_argument);
}

TEST(SteadyAudit, MaxwellCaseHasNothingToApply) {
  AuditReport r = audit_steady_profile(fake_steady(0.0, 1.0));
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.find("energy_upper_bound").parameters["applies"], false);
}

TEST(SteadyAudit, FlagsOverheatedProfile) {
  SteadyResult ok = fake_steady(0.1, 0.3);
  EXPECT_TRUE(audit_steady_profile(ok).passed());
  SteadyResult hot = fake_steady(0.1, 0.7);
  AuditReport r = audit_steady_profile(hot);
  EXPECT_FALSE(r.find("energy_upper_bound").passed());
  SteadyResult bad = ok;
  bad.i_gamma_identity = 1e-6;
  EXPECT_FALSE(audit_steady_profile(bad).find("steady_energy_identity").passed());
}

TEST(SteadyAudit, PointwiseBoundNeedsStableRefinement) {
  SteadyResult fine = fake_steady(0.1, 0.3), coarse = fine;
  coarse.max_xG = 0.301;
  EXPECT_TRUE(audit_steady_profile(fine, &coarse).find("pointwise_xG").passed());
  coarse.max_xG = 0.4;
  EXPECT_FALSE(audit_steady_profile(fine, &coarse).find("pointwise_xG").passed());
  fine.max_xG = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(audit_steady_profile(fine).find("pointwise_xG").passed());
}

TEST(Interpolation, FittedConstantIsStable) {
  InterpolationFit fit = fit_interpolation_constant(100, 5, Grid(12, 512));
  EXPECT_GT(fit.constant, 0.0);
  EXPECT_TRUE(interpolation_check(fit).passed());
  EXPECT_THROW(fit_interpolation_constant(10, 5, Grid(12, 512), 2.3, 2.8, 0.5), std::invalid_argument);
}
