#include <gtest/gtest.h>

#include <cmath>

#include "cellkit/coupling/coupled.hpp"
#include "cellkit/errors.hpp"
#include "cellkit/fv/grid.hpp"

using namespace cellkit;
using namespace cellkit::coupling;

namespace {

CouplingValues cubic(double t) {
  return {1 + t - 2 * t * t + 0.5 * t * t * t, -3 * t * t * t, 2.0, std::sin(0.0) + t};
}

struct Fixture {
  model::Model m{model::PhysicalParameters::reference(31000)};
  fv::Discretization d;
  model::ExternalCondition bc;
  Vec y0;
  Fixture(int cells, double c_rate)
      : d(m, fv::Grid::from_total(m, cells)),
        bc(model::resolve(model::ConstantCurrent{c_rate}, 0.0, m)),
        y0(fv::consistent_init(d, d.initial_guess(), bc)) {}
};

Vec monolithic(const Fixture& f, double t1, double rtol) {
  fv::FullSystem sys(f.d, fv::constant_boundary(f.bc));
  dae::IntegratorOptions o;
  o.control.rtol = rtol;
  o.control.atol = rtol * 1e-2;
  o.store_steps = false;
  dae::Integrator in(sys, dae::radau_iia(3), o);
  return in.integrate(f.y0, 0.0, t1).y_end;
}

}  // namespace

TEST(Predictor, ReproducesPolynomialsOfItsDegree) {
  Predictor p;
  for (double t : {0.0, 0.3, 0.5, 1.1, 1.2}) p.push(t, cubic(t));
  const auto e = p.extrapolant(3);
  EXPECT_EQ(e.degree(), 3);
  for (double t : {1.3, 1.7, 2.5}) {
    const auto a = e(t), b = cubic(t);
    for (int q = 0; q < 4; ++q) EXPECT_NEAR(a[q], b[q], 1e-12 * std::max(1.0, std::abs(b[q])));
  }
  const auto in = p.interpolant(2, 1.2, 1.6, cubic(1.6));
  EXPECT_EQ(in.degree(), 2);
  EXPECT_NEAR(in(1.6)[0], cubic(1.6)[0], 1e-14);
  EXPECT_NEAR(in(1.2)[1], cubic(1.2)[1], 1e-14);
  EXPECT_THROW(in(1.8), DomainError);
  const auto c = p.extrapolant(0);
  EXPECT_EQ(c(5.0)[3], cubic(1.2)[3]);
}

TEST(Predictor, RejectsNonIncreasingTimesAndShortHistory) {
  Predictor p;
  p.push(1.0, cubic(1.0));
  EXPECT_THROW(p.push(1.0, cubic(1.0)), Error);
  EXPECT_THROW(p.extrapolant(1), Error);
  EXPECT_NO_THROW(p.interpolant(1, 1.0, 2.0, cubic(2.0)));
}

TEST(AdaptDt, ControllerLaw) {
  CouplingConfig c;
  c.dt_c_min = 1e-6;
  auto d = adapt_dt(0.1, 1e-6, 1e-6, 2, c);
  EXPECT_NEAR(d.dt_next, 0.1, 1e-15);
  EXPECT_TRUE(d.accept);
  d = adapt_dt(0.1, 0.0, 1e-6, 2, c);
  EXPECT_NEAR(d.dt_next, 0.2, 1e-15);
  d = adapt_dt(0.1, 4e-6, 1e-6, 2, c);
  EXPECT_NEAR(d.dt_next, 0.05, 1e-15);
  EXPECT_FALSE(d.accept);
  d = adapt_dt(0.1, 1e-9, 1e-6, 1, c);
  EXPECT_NEAR(d.dt_next, 0.2, 1e-15);
  c.dt_c_max = 0.15;
  EXPECT_NEAR(adapt_dt(0.1, 1e-9, 1e-6, 1, c).dt_next, 0.15, 1e-15);
  EXPECT_THROW(adapt_dt(1e-5, 1.0, 1e-6, 1, c), StepSizeUnderflow);
}

TEST(AdaptDt, RejectionAlwaysShrinks) {
  CouplingConfig c;
  auto d = adapt_dt(0.1, 1.0001e-6, 1e-6, 2, c);
  EXPECT_FALSE(d.accept);
  EXPECT_NEAR(d.dt_next, 0.09, 1e-15);
  d = adapt_dt(0.1, 1.6e-5, 1e-6, 2, c);
  EXPECT_NEAR(d.dt_next, 0.025, 1e-15);
}

TEST(CouplingConfig, Validation) {
  CouplingConfig c;
  EXPECT_NO_THROW(c.validate());
  c.order = 5;
  EXPECT_THROW(c.validate(), ConfigError);
  c.order = 2;
  c.adaptive = false;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(mode_from_string("explicit"), CouplingMode::Explicit);
  EXPECT_THROW(mode_from_string("jacobi"), ConfigError);
}

TEST(Coupling, SubProblemDimensions) {
  Fixture f(20, 1.0);
  const auto& g = f.d.grid();
  fv::SubSystem e(f.d, fv::Block::Electrolyte, fv::constant_boundary(f.bc), nullptr);
  fv::SubSystem s(f.d, fv::Block::Solid, fv::constant_boundary(f.bc), nullptr);
  EXPECT_EQ(e.size(), static_cast<std::size_t>(2 * g.n_e + 4));
  EXPECT_EQ(s.size(), static_cast<std::size_t>(2 * g.n_s() + 2));
  Vec back = Vec::Zero(f.d.size());
  e.insert(e.extract(f.y0), back);
  s.insert(s.extract(f.y0), back);
  EXPECT_EQ((back - f.y0).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Coupling, SyncSolveRecoversInterfaceValues) {
  Fixture f(20, 1.0);
  Vec y = f.y0;
  const auto exact = coupling_values(f.d, y);
  for (int k = 2; k < 6; ++k) y[f.d.aux(k)] *= 1.05;
  for (int i = 0; i < f.d.grid().n_e; ++i) y[f.d.pe(i)] += 0.01;
  const auto u = sync_solve(f.d, y, f.bc);
  EXPECT_GT(std::abs(interface_determinant(f.d, y)), 0.0);
  for (int q = 0; q < 4; ++q) EXPECT_NEAR(u[q], exact[q], 1e-11 * std::max(1.0, std::abs(exact[q])));
}

TEST(Coupling, RestStateNeedsOneRelaxationSweep) {
  Fixture f(8, 0.0);
  CouplingConfig c;
  c.order = 2;
  c.tol = 1e-8;
  CoupledSolver s(f.d, fv::constant_boundary(f.bc), c);
  const auto r = s.run(f.y0, 0.0, 0.1);
  EXPECT_LT((r.y_end - f.y0).lpNorm<Eigen::Infinity>(), 1e-10);
  for (const auto& rep : r.reports) {
    EXPECT_TRUE(rep.accepted);
    EXPECT_EQ(rep.wr_iterations, rep.degree > 0 ? 2 : 1);
  }
}

class CoupledMatchesMonolithic : public ::testing::TestWithParam<std::tuple<CouplingMode, int, int>> {};

TEST_P(CoupledMatchesMonolithic, AdaptiveRun) {
  const auto [mode, order, threads] = GetParam();
  Fixture f(20, 1.0);
  const double t1 = 0.5;
  const Vec ref = monolithic(f, t1, 1e-12);
  CouplingConfig c;
  c.mode = mode;
  c.order = order;
  c.tol = 1e-7;
  c.threads = threads;
  CoupledSolver s(f.d, fv::constant_boundary(f.bc), c);
  const auto r = s.run(f.y0, 0.0, t1);
  EXPECT_EQ(r.sync.t.back(), t1);
  EXPECT_LT((r.y_end - ref).norm() / ref.norm(), 1e-5);
  EXPECT_LT(r.stats.max_lithium_defect, c.tol);
  EXPECT_GT(r.stats.intervals, 3);
}

INSTANTIATE_TEST_SUITE_P(Modes, CoupledMatchesMonolithic,
                         ::testing::Values(std::make_tuple(CouplingMode::Explicit, 1, 1),
                                           std::make_tuple(CouplingMode::Explicit, 3, 1),
                                           std::make_tuple(CouplingMode::Implicit, 2, 1),
                                           std::make_tuple(CouplingMode::Implicit, 2, 2)));

TEST(Coupling, FixedIntervalsConvergeAtPredictorOrder) {
  Fixture f(20, 1.0);
  const double t1 = 0.5;
  const Vec ref = monolithic(f, t1, 1e-13);
  auto err = [&](int n) {
    CouplingConfig c;
    c.mode = CouplingMode::Explicit;
    c.order = 2;
    c.adaptive = false;
    c.fixed_intervals = n;
    c.sub_rtol = 1e-13;
    CoupledSolver s(f.d, fv::constant_boundary(f.bc), c);
    return (s.run(f.y0, 0.0, t1).y_end - ref).norm() / ref.norm();
  };
  const double e1 = err(20), e2 = err(40);
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.4) << e1 << " " << e2;
}
