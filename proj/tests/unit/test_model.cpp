#include <gtest/gtest.h>

#include <cmath>

#include "cellkit/errors.hpp"
#include "cellkit/model/expression.hpp"
#include "cellkit/model/mode.hpp"
#include "cellkit/model/ocp.hpp"
#include "cellkit/model/params.hpp"

using namespace cellkit;
using namespace cellkit::model;

TEST(Expression, EvaluatesValueAndDerivative) {
  const auto e = Expression::parse("2*x^3 - exp(x) + log(x)/x");
  const double x = 0.7;
  const auto d = e.evaluate(x);
  EXPECT_NEAR(d.value, 2 * x * x * x - std::exp(x) + std::log(x) / x, 1e-14);
  EXPECT_NEAR(d.deriv, 6 * x * x - std::exp(x) + (1 - std::log(x)) / (x * x), 1e-13);
}

TEST(Expression, PrecedenceAndUnaryMinus) {
  EXPECT_DOUBLE_EQ(Expression::parse("-2^2").evaluate(0).value, -4.0);
  EXPECT_DOUBLE_EQ(Expression::parse("1 + 2 * 3 - 4 / 2").evaluate(0).value, 5.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2^3^2").evaluate(0).value, 512.0);
  EXPECT_NEAR(Expression::parse("sinh(x)*cosh(x)").evaluate(0.3).deriv, std::cosh(0.6), 1e-14);
}

TEST(Expression, RejectsMalformedInput) {
  EXPECT_THROW(Expression::parse("1 + "), ConfigError);
  EXPECT_THROW(Expression::parse("foo(x)"), ConfigError);
  EXPECT_THROW(Expression::parse("(x"), ConfigError);
  EXPECT_THROW(Expression::parse("x y"), ConfigError);
}

TEST(Ocp, DefaultCurveReferenceValue) {
  const auto u = OpenCircuitPotential::default_curve();
  EXPECT_NEAR(u(13000.0 / 31000.0), 0.1026, 5e-5);
}

TEST(Ocp, ExpressionRangeIsOpen) {
  const auto u = OpenCircuitPotential::default_curve();
  EXPECT_THROW(u(0.0), OcpRangeError);
  EXPECT_THROW(u(1.0), OcpRangeError);
  EXPECT_THROW(u(1.2), OcpRangeError);
}

TEST(Ocp, TableIsMonotoneAndInterpolates) {
  const auto u = OpenCircuitPotential::from_table({0.1, 0.3, 0.5, 0.9}, {0.4, 0.2, 0.15, 0.0});
  EXPECT_DOUBLE_EQ(u(0.3), 0.2);
  double prev = u(0.1);
  for (double x = 0.1; x <= 0.9; x += 0.01) {
    const double v = u(x);
    EXPECT_LE(v, prev + 1e-15);
    prev = v;
  }
  const auto d = u.evaluate(0.4);
  const double h = 1e-6;
  EXPECT_NEAR(d.deriv, (u(0.4 + h) - u(0.4 - h)) / (2 * h), 1e-6);
  EXPECT_THROW(u(0.05), OcpRangeError);
  EXPECT_THROW(OpenCircuitPotential::from_table({0.1, 0.1}, {0, 1}), ConfigError);
}

TEST(Params, RequiresSolidCapacity) {
  PhysicalParameters p;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_NO_THROW(PhysicalParameters::reference(31000).validate());
}

TEST(Params, ScalesAndReferenceCurrent) {
  const Model m(PhysicalParameters::reference(31000));
  EXPECT_NEAR(m.scales().potential_scale, 8.314 * 298.15 / 96487, 1e-15);
  EXPECT_NEAR(m.scales().length_scale, 40e-6, 1e-18);
  EXPECT_NEAR(m.scales().time_scale, 16.0, 1e-12);
  EXPECT_NEAR(m.reference_current(), 96487 * 10e-6 * 31000 / 3600, 1e-9);
}

TEST(Params, KineticsDerivativesMatchDifferences) {
  const Model m(PhysicalParameters::reference(31000));
  const double ce = 0.9, pe = -0.3, cs = 0.42, ps = 4.1;
  const auto c = m.bv_cathode(ce, pe, cs, ps);
  const double h = 1e-7;
  auto I = [&](double a, double b, double s, double t) { return m.bv_cathode(a, b, s, t).i; };
  EXPECT_NEAR(c.di_dce, (I(ce + h, pe, cs, ps) - I(ce - h, pe, cs, ps)) / (2 * h), 1e-6 * std::abs(c.di_dce) + 1e-8);
  EXPECT_NEAR(c.di_dphi_e, (I(ce, pe + h, cs, ps) - I(ce, pe - h, cs, ps)) / (2 * h), 1e-6 * std::abs(c.di_dphi_e));
  EXPECT_NEAR(c.di_dcs, (I(ce, pe, cs + h, ps) - I(ce, pe, cs - h, ps)) / (2 * h), 1e-6 * std::abs(c.di_dcs));
  EXPECT_NEAR(c.di_dphi_s, (I(ce, pe, cs, ps + h) - I(ce, pe, cs, ps - h)) / (2 * h), 1e-6 * std::abs(c.di_dphi_s));
  const auto a = m.bv_anode(0.2);
  EXPECT_NEAR(a.i, 2 * 10.0 * std::sinh(-0.1), 1e-13);
  EXPECT_NEAR(a.di_dphi_e, -10.0 * std::cosh(-0.1), 1e-13);
}

TEST(Params, KineticsDomainErrors) {
  const Model m(PhysicalParameters::reference(31000));
  EXPECT_THROW(m.bv_cathode(0.0, 0, 0.5, 0), DomainError);
  EXPECT_THROW(m.bv_cathode(1.0, 0, 1.0, 0), DomainError);
  EXPECT_THROW(m.bv_anode(200.0), DomainError);
}

TEST(Mode, ResolvesDrives) {
  const Model m(PhysicalParameters::reference(31000));
  const auto cc = resolve(ConstantCurrent{1.0}, 0.0, m);
  EXPECT_EQ(cc.kind, ExternalCondition::Kind::Current);
  EXPECT_NEAR(cc.value, -m.reference_current() / m.scales().current_s_scale, 1e-14);
  const auto cv = resolve(ConstantVoltage{0.3}, 5.0, m);
  EXPECT_EQ(cv.kind, ExternalCondition::Kind::Potential);
  EXPECT_NEAR(cv.value, 0.3 / m.scales().potential_scale, 1e-12);
  const auto sv = resolve(SineVoltage{0.2, 0.1, 2.0, 100.0}, 12.5, m);
  EXPECT_NEAR(sv.value * m.scales().potential_scale, 0.2 * (1 + 0.1), 1e-12);
  EXPECT_NEAR(resolve(HoldVoltage{}, 1.0, m, 0.25).value, 0.25 / m.scales().potential_scale, 1e-12);
}

TEST(Mode, PhaseLookup) {
  const auto mode = OperatingMode::cc_then_cv(1.0, 11.0);
  ASSERT_EQ(mode.phases().size(), 2u);
  EXPECT_EQ(mode.phase_at(0.0), 0u);
  EXPECT_EQ(mode.phase_at(10.999), 0u);
  EXPECT_EQ(mode.phase_at(11.0), 1u);
  EXPECT_THROW(OperatingMode::sequence({}), ConfigError);
}
