#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "thinfilm/continuation.hpp"

using namespace thinfilm;

namespace {

Branch synthetic_branch(const std::vector<double>& masses, const std::vector<double>& qs) {
  Branch b;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    BranchPoint p;
    p.omega = 1.0;
    p.q = qs[i];
    p.mass = masses[i];
    b.points.push_back(p);
  }
  return b;
}

BranchPoint seed_point(const CollocationOperators& ops, double omega, double mass_value) {
  NewtonConfig nc;
  nc.tol = 1e-11;
  const NewtonReport r = seed_at_mass(ops, omega, mass_value, nc);
  EXPECT_TRUE(r.converged());
  return make_branch_point(r.solution, ModelParams(omega, r.q_out), true);
}

}  // namespace

TEST(DetectFolds, MonotoneBranchHasNone) {
  EXPECT_TRUE(detect_folds(synthetic_branch({0.1, 0.2, 0.3, 0.4}, {1.0, 2.0, 3.0, 4.0})).empty());
}

TEST(DetectFolds, SyntheticParabola) {
  std::vector<double> ms, qs;
  const double step = 0.07;
  for (double m = 0.5; m <= 1.5; m += step) {
    ms.push_back(m);
    qs.push_back(1.0 - (m - 1.0) * (m - 1.0));
  }
  const auto folds = detect_folds(synthetic_branch(ms, qs));
  ASSERT_EQ(folds.size(), 1u);
  EXPECT_NEAR(folds[0].label, 1.0, step);
  EXPECT_NEAR(folds[0].parameter, 1.0, 1e-12);
}

TEST(JoinBranches, OrdersThroughStart) {
  const Branch back = synthetic_branch({1.0, 0.9, 0.8}, {1, 2, 3});
  const Branch fwd = synthetic_branch({1.0, 1.1}, {1, 0});
  const Branch j = join_branches(back, fwd);
  ASSERT_EQ(j.points.size(), 4u);
  EXPECT_EQ(j.points.front().mass, 0.8);
  EXPECT_EQ(j.points[2].mass, 1.0);
  EXPECT_EQ(j.points.back().mass, 1.1);
}

TEST(TraceFixedOmega, TwoSolutionsAtSameFlux) {
  const CollocationOperators ops(Grid(128));
  const double omega = 0.09, q = 0.0114039;
  const BranchPoint start = seed_point(ops, omega, 1.0);
  ContinuationConfig cc;
  cc.mass_min = 0.5;
  cc.mass_max = 1.5;
  cc.direction = -1;
  const Branch back = trace_fixed_omega(ops, omega, start, cc);
  cc.direction = +1;
  const Branch branch = join_branches(back, trace_fixed_omega(ops, omega, start, cc));

  for (const auto& b : branch.points) {
    EXPECT_GT(b.u_min, 0.0);
    EXPECT_LT(b.residual, 1e-8);
  }
  const auto folds = detect_folds(branch);
  ASSERT_GE(folds.size(), 1u);
  NewtonConfig nc;
  nc.tol = 1e-11;
  auto sols = solutions_at_flux(ops, branch, q, nc);
  ASSERT_EQ(sols.size(), 2u);
  std::sort(sols.begin(), sols.end(), [](auto& a, auto& b) { return a.mass < b.mass; });
  EXPECT_NEAR(sols[0].mass, 0.912782, 1e-3);
  EXPECT_NEAR(sols[1].mass, 1.0, 1e-4);
  EXPECT_TRUE(folds[0].label > sols[0].mass && folds[0].label < sols[1].mass);
}

TEST(TraceFixedOmega, NearConstantRegimeAtLargeOmega) {
  const CollocationOperators ops(Grid(32));
  const double omega = 1.0, q = 1e-3;
  NewtonConfig nc;
  const NewtonReport seed = seed_small_amplitude(ops, ModelParams(omega, q), nc);
  ASSERT_TRUE(seed.converged());
  ContinuationConfig cc;
  cc.max_points = 40;
  cc.param_max = 0.02;
  const Branch b = trace_fixed_omega(ops, omega, make_branch_point(seed.solution, ModelParams(omega, q), true), cc);
  ASSERT_GT(b.points.size(), 5u);
  for (const auto& pt : b.points) {
    const double lin = 2.0 * std::numbers::pi * pt.q / omega;
    EXPECT_NEAR(pt.mass, lin, 1e-3 * lin);
  }
}

TEST(TraceFixedMass, StaysBelowNonexistenceCurve) {
  const CollocationOperators ops(Grid(128));
  const BranchPoint start = seed_point(ops, 1.0, 1.0);
  ContinuationConfig cc;
  cc.direction = -1;
  cc.param_min = 1e-4;
  const Branch b = trace_fixed_mass(ops, 1.0, start, cc);
  EXPECT_EQ(b.termination, "parameter bound");
  ASSERT_GT(b.points.size(), 10u);
  for (const auto& pt : b.points) {
    EXPECT_LT(pt.q, nonexistence_flux(pt.omega));
    EXPECT_NEAR(pt.mass, 1.0, 1e-9);
  }
  // Large ω: q/ω nearly constant (≈ M/2π).
  const auto& first = b.points.front();
  EXPECT_NEAR(first.q / first.omega, 1.0 / (2.0 * std::numbers::pi), 1e-2);

  // Small ω: local log-log slope of q(ω) exceeds 3/2.
  std::vector<BranchPoint> small;
  for (const auto& pt : b.points)
    if (pt.omega < 1e-3) small.push_back(pt);
  ASSERT_GE(small.size(), 3u);
  const double beta = std::log(small.front().q / small.back().q) / std::log(small.front().omega / small.back().omega);
  EXPECT_GT(beta, 1.5);
}

TEST(TraceFixedOmega, RejectsUnsolvedStart) {
  const CollocationOperators ops(Grid(32));
  BranchPoint bp = make_branch_point(approx_steady(ops.grid, 0.5, 0.3), ModelParams(0.5, 0.3), true);
  EXPECT_THROW(trace_fixed_omega(ops, 0.5, bp), ParameterError);
  bp.profile.reset();
  EXPECT_THROW(trace_fixed_omega(ops, 0.5, bp), ParameterError);
}

TEST(TraceFixedOmega, SixCoexistingSolutionsAtTinyOmega) {
  const CollocationOperators ops(Grid(256));
  const double omega = 5e-6;
  const double q0 = 0.1 * nonexistence_flux(omega);
  NewtonConfig nc;
  nc.tol = 1e-13;
  const NewtonReport seed = seed_small_amplitude(ops, ModelParams(omega, q0), nc);
  ASSERT_TRUE(seed.converged());
  ContinuationConfig cc;
  cc.max_points = 3000;
  cc.mass_max = 0.05;
  cc.max_step = 0.1;
  cc.corrector_tol = 1e-6;
  const Branch b = trace_fixed_omega(ops, omega, make_branch_point(seed.solution, ModelParams(omega, q0), true), cc);
  EXPECT_GE(detect_folds(b).size(), 5u);
  int best = 0;
  for (const auto& a : b.points) {
    const double level = a.q * (1.0 + 1e-7);
    int crossings = 0;
    for (std::size_t i = 0; i + 1 < b.points.size(); ++i)
      crossings += (b.points[i].q - level) * (b.points[i + 1].q - level) < 0.0;
    best = std::max(best, crossings);
  }
  EXPECT_GE(best, 6);
}
