#include <gtest/gtest.h>

#include <cmath>

#include "cellkit/errors.hpp"
#include "cellkit/fv/grid.hpp"
#include "cellkit/studies/gates.hpp"
#include "cellkit/studies/studies.hpp"

using namespace cellkit;
using namespace cellkit::studies;

namespace {

const model::PhysicalParameters& params() {
  static const auto p = model::PhysicalParameters::reference(31000);
  return p;
}

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

}  // namespace

TEST(RelativeError, IdenticalIsZero) {
  const Vec y = vec({1.0, -2.0, 3.5});
  EXPECT_EQ(relative_error(y, y), 0.0);
}

TEST(RelativeError, DoubledIsOne) {
  const Vec y = vec({1.0, -2.0, 3.5});
  EXPECT_DOUBLE_EQ(relative_error(2.0 * y, y), 1.0);
}

TEST(RelativeError, ScaleInvariant) {
  const Vec a = vec({1.0, 2.0, 3.0}), b = vec({1.1, 1.9, 3.2});
  EXPECT_NEAR(relative_error(7.5 * a, 7.5 * b), relative_error(a, b), 1e-15);
}

TEST(RelativeError, Preconditions) {
  EXPECT_THROW(relative_error(vec({1.0}), vec({0.0})), ZeroReference);
  EXPECT_THROW(relative_error(vec({1.0, 2.0}), vec({1.0})), Error);
}

TEST(FitLogLog, RecoversPowerLaw) {
  std::vector<double> x{0.1, 0.05, 0.025, 0.0125}, y;
  for (double v : x) y.push_back(3.0 * v * v);
  const auto f = fit_loglog(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, std::log10(3.0), 1e-12);
  EXPECT_LT(f.residual, 1e-12);
  EXPECT_EQ(f.points, 4);
}

TEST(FitLogLog, SkipsFlaggedAndNonPositivePoints) {
  const std::vector<double> x{1, 2, 4, 8}, y{1, 0.25, 0.0, 99.0};
  const auto f = fit_loglog(x, y, {true, true, true, false});
  EXPECT_EQ(f.points, 2);
  EXPECT_NEAR(f.slope, -2.0, 1e-12);
  EXPECT_FALSE(f.used[2]);
  EXPECT_THROW(fit_loglog({1.0}, {1.0}), Error);
}

TEST(LogLogInterpolation, InsideAndOutside) {
  const std::vector<double> x{1e-4, 1e-6}, y{1.0, 4.0};
  EXPECT_NEAR(interpolate_loglog(x, y, 1e-5), 2.0, 1e-12);
  EXPECT_TRUE(std::isnan(interpolate_loglog(x, y, 1e-8)));
  EXPECT_NEAR(extrapolate_loglog(x, y, 1e-8), 16.0, 1e-9);
  EXPECT_NEAR(extrapolate_loglog({1e-3, 1e-4, 1e-6}, {0.5, 1.0, 4.0}, 1e-5), 2.0, 1e-12);
}

TEST(Simulate, HoldPhaseKeepsSwitchVoltage) {
  const model::Model m(params());
  const fv::Discretization d(m, fv::Grid::from_total(m, 20));
  const auto mode = model::OperatingMode::cc_then_cv(1.0, 11.0);
  sim::MonolithicOptions o;
  o.rtol = 1e-9;
  const auto r = sim::simulate(d, mode, 30.0, o);
  const double ts = m.scales().time_scale;
  double before = 0.0;
  for (std::size_t k = 0; k < r.steps.t.size(); ++k) {
    const double t = r.steps.t[k] * ts;
    if (t <= 11.0) before = r.step_voltage[k];
    if (t > 11.0) EXPECT_NEAR(r.step_voltage[k], r.held_volts, 1e-10) << "t = " << t;
  }
  EXPECT_NEAR(before, r.held_volts, 1e-12);
  EXPECT_EQ(r.step_flux.size() + 1, r.steps.t.size());
}

TEST(Simulate, ReversedWindowIsConfigError) {
  const model::Model m(params());
  const fv::Discretization d(m, fv::Grid::from_total(m, 20));
  EXPECT_THROW(sim::simulate(d, model::OperatingMode::constant_current(1.0), 0.0, {}), ConfigError);
}

TEST(SpaceConvergence, DoublingRatioNearFour) {
  SpaceConvergenceSpec s;
  s.grids = {100, 200};
  s.times = {5.0};
  const auto r = space_convergence(params(), s);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_NEAR(r.rows[0].err_ce / r.rows[1].err_ce, 4.0, 0.6);
}

TEST(TemporalOrder, ImplicitEulerHalvesError) {
  TemporalOrderSpec s;
  s.cells = 20;
  s.schemes = {"implicit_euler"};
  s.euler_steps = {64, 128, 256};
  const auto r = temporal_order(params(), s);
  ASSERT_EQ(r.fits.size(), 1u);
  EXPECT_NEAR(r.fits[0].second.slope, 1.0, 0.2);
}

TEST(IndexCheck, FullRankWithFiveNonDominantRowsPerGrid) {
  IndexCheckSpec s;
  s.grids = {8, 16};
  s.times = {0.0};
  const auto r = index_check(params(), s);
  for (const auto& row : r.rows) EXPECT_EQ(row.rank, row.size);
  EXPECT_EQ(r.non_dominant_rows.size(), 10u);
}

TEST(Conditioning, ConstantCurrentSolidJacobianHasIsolatedSmallEigenvalue) {
  ConditioningSpec s;
  s.grids = {8, 16};
  s.t_eval = 20.0;
  const auto r = conditioning(params(), s);
  double cc = 0.0, cv = 0.0;
  for (const auto& row : r.rows) {
    if (row.matrix != "solid" || row.cells != 16) continue;
    if (row.drive == "cc") {
      EXPECT_LT(row.eig_min, 1e-3 * row.eig_median);
      cc = row.cond;
    } else {
      cv = row.cond;
    }
  }
  EXPECT_LT(cv, 0.1 * cc);
}

TEST(Invariants, HoldOnSmallGrid) {
  InvariantSpec s;
  s.cells = 20;
  s.t_end = 50.0;
  s.coupled_t_end = 10.0;
  for (const auto& g : invariant_gates(params(), s)) EXPECT_TRUE(g.pass) << g.name << ": " << g.detail;
}

TEST(Gates, WorkPrecisionNeedsFactorForEveryHighOrder) {
  WorkPrecisionResult r;
  r.time_at_target = {{1, 3.0, false}, {3, 2.1, false}, {4, 1.0, true}};
  EXPECT_FALSE(all_pass(work_precision_gates(r)));
  r.time_at_target[1].wall = 2.0;
  EXPECT_TRUE(all_pass(work_precision_gates(r)));
}
