#include <gtest/gtest.h>

#include <cmath>

#include "cellkit/oracle/analytic.hpp"

using namespace cellkit;
using namespace cellkit::oracle;

namespace {

AnalyticalConfig cfg_with(double i_ext) {
  AnalyticalConfig c;
  c.params = model::PhysicalParameters::reference(31000);
  c.i_ext = i_ext;
  return c;
}

// Composite Simpson on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

}  // namespace

TEST(Oracle, BetaCoefficients) {
  const auto b = beta_coefficients(cfg_with(1.0));
  EXPECT_NEAR(b.beta_e, 0.6 / (96487 * 1e-10), 1e-6);
  EXPECT_NEAR(b.beta_e / 6.2184e4, 1.0, 1e-4);
  EXPECT_NEAR(b.beta_s, 1.0 / (96487 * 3e-14), 1e-3);
  const auto z = beta_coefficients(cfg_with(0.0));
  EXPECT_EQ(z.beta_e, 0.0);
  EXPECT_EQ(z.beta_s, 0.0);
  const auto n = beta_coefficients(cfg_with(-1.0));
  EXPECT_DOUBLE_EQ(n.beta_e, -b.beta_e);
}

TEST(Oracle, MidpointPin) {
  const auto c = cfg_with(-8.3);
  for (double t : {0.0, 0.1, 1.0, 5.0, 500.0}) EXPECT_DOUBLE_EQ(ce_analytic(10e-6, t, c).value, 1000.0) << t;
}

TEST(Oracle, InitialCondition) {
  const auto c = cfg_with(-8.3);
  for (double x : {0.0, 2e-6, 7e-6, 13e-6, 20e-6}) EXPECT_NEAR(ce_analytic(x, 0.0, c).value, 1000.0, 1e-8 * 1000.0);
  for (double xb : {0.0, 1e-6, 5e-6, 10e-6}) EXPECT_NEAR(cs_analytic(xb, 0.0, c).value, 13000.0, 1e-8 * 13000);
  // Just after t = 0 the truncated series is still close to the initial state.
  const auto early = ce_analytic(7e-6, 1e-9, c);
  EXPECT_FALSE(early.converged);
  EXPECT_EQ(early.terms, c.k_max);
  EXPECT_NEAR(early.value, 1000.0, 1e-4 * 1000.0);
}

TEST(Oracle, SteadyElectrolyteProfile) {
  const auto v = ce_analytic(0.0, 1e4, cfg_with(1.0));
  EXPECT_TRUE(v.converged);
  EXPECT_NEAR(v.value, 1000.0 + 0.62184, 1e-4);
}

TEST(Oracle, ElectrolyteMassInvariance) {
  const auto c = cfg_with(-8.3);
  for (double t : {0.05, 1.0, 10.0}) {
    const double m = simpson([&](double x) { return ce_analytic(x, t, c).value; }, 0.0, 20e-6, 2000);
    EXPECT_NEAR(m / (1000.0 * 20e-6), 1.0, 1e-10) << t;
  }
}

TEST(Oracle, SeriesSatisfyDiffusion) {
  const auto c = cfg_with(-8.3);
  const double t = 2.0, x = 6e-6, dt = 1e-4, dx = 2e-7;
  auto ce = [&](double xx, double tt) { return ce_analytic(xx, tt, c).value; };
  const double ct = (ce(x, t + dt) - ce(x, t - dt)) / (2 * dt);
  const double cxx = (ce(x + dx, t) - 2 * ce(x, t) + ce(x - dx, t)) / (dx * dx);
  EXPECT_NEAR(ct, 1e-10 * cxx, 1e-4 * std::abs(ct) + 1e-9);

  // Solid diffusion is slow: use a later time and a wider time step.
  auto cs = [&](double xx, double tt) { return cs_analytic(xx, tt, c).value; };
  const double ts = 200.0, xs = 1e-6, dts = 0.5;
  const double st = (cs(xs, ts + dts) - cs(xs, ts - dts)) / (2 * dts);
  const double sxx = (cs(xs + dx, ts) - 2 * cs(xs, ts) + cs(xs - dx, ts)) / (dx * dx);
  EXPECT_NEAR(st, 3e-14 * sxx, 1e-3 * std::abs(st));
}

TEST(Oracle, SolidMeanRateAndZeroFlux) {
  const auto c = cfg_with(-8.3);
  const double L = 10e-6;
  auto mean = [&](double t) { return simpson([&](double x) { return cs_analytic(x, t, c).value; }, 0, L, 400) / L; };
  const double rate = (mean(3.0) - mean(2.0));
  EXPECT_NEAR(rate, -8.3 / (96487 * L), 1e-6 * 8.3 / (96487 * L));
  const double h = 1e-9;
  const double grad = (cs_analytic(L, 2.0, c).value - cs_analytic(L - h, 2.0, c).value) / h;
  const double bs = beta_coefficients(c).beta_s;
  EXPECT_LT(std::abs(grad), 1e-4 * std::abs(bs));
  const double hb = 1e-9, tb = 200.0;
  const double g0 = (-3 * cs_analytic(0, tb, c).value + 4 * cs_analytic(hb, tb, c).value -
                     cs_analytic(2 * hb, tb, c).value) / (2 * hb);
  EXPECT_NEAR(g0, -bs, 1e-3 * std::abs(bs));
}

TEST(Oracle, ElectrolytePotential) {
  const auto c1 = cfg_with(1.0);
  const double rt_f = 8.314 * 298.15 / 96487;
  EXPECT_NEAR(phie_analytic(0.0, 3.0, c1), 2 * rt_f * std::asinh(-0.05), 1e-15);
  EXPECT_NEAR(phie_analytic(0.0, 3.0, c1), -2.568e-3, 2e-6);
  EXPECT_DOUBLE_EQ(phie_analytic(7e-6, 3.0, cfg_with(0.0)), 0.0);
  auto ohm = cfg_with(2.0);
  ohm.params.transference = 1.0;
  EXPECT_NEAR(phie_analytic(15e-6, 1.0, ohm) - phie_analytic(0, 1.0, ohm), -2.0 * 15e-6, 1e-18);
}

TEST(Oracle, CellVoltage) {
  const auto c0 = cfg_with(0.0);
  EXPECT_NEAR(cell_voltage_analytic(4.0, c0), c0.params.ocp(13000.0 / 31000.0), 1e-15);
  const double ohmic = 1e-5 / 100 + 1e-5 / 3700;
  EXPECT_NEAR(ohmic, 1.027e-7, 1e-10);
  // 1C charge: U jumps by the anode and cathode overpotentials, about 0.17 V
  // above open circuit, then rises as the surface stoichiometry drops.
  const auto c = AnalyticalConfig::from_c_rate(c0.params, 1.0);
  const double u_start = cell_voltage_analytic(1e-3, c);
  EXPECT_NEAR(u_start, 0.2756, 2e-3);
  EXPECT_GT(cell_voltage_analytic(11.0, c), u_start);
}
