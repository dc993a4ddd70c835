#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cellkit/dae/newton.hpp"
#include "cellkit/fv/grid.hpp"
#include "cellkit/fv/systems.hpp"
#include "cellkit/oracle/analytic.hpp"
#include "cellkit/studies/gates.hpp"

namespace cellkit::studies {

namespace {

// Largest entry-wise mismatch, each row scaled by its differenced magnitude.
double jacobian_mismatch(const fv::Discretization& d, const Vec& y, const model::ExternalCondition& bc) {
  auto res = [&](const Vec& x, Vec& f) {
    f = Vec::Zero(d.size());
    d.residual(x.data(), bc, f.data());
  };
  const dae::Mat fd = dae::jacobian_fd(res, y, 1e-6);
  dae::Triplets t;
  d.jacobian(y.data(), bc, t);
  const dae::Mat an = dae::SparseMatrix::from_triplets(d.size(), d.size(), t).to_dense();
  double worst = 0.0;
  for (int r = 0; r < d.size(); ++r) {
    const double scale = std::max(1.0, fd.row(r).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, (an.row(r) - fd.row(r)).lpNorm<Eigen::Infinity>() / scale);
  }
  return worst;
}

Gate jacobian_gate(const model::Model& m, const InvariantSpec& spec) {
  const fv::Discretization d(m, fv::Grid::from_total(m, 20));
  const auto cc = model::OperatingMode::constant_current(spec.c_rate);
  sim::MonolithicOptions o;
  o.store_steps = false;
  // A loaded state away from rest, so the kinetic and transport terms are live.
  const Vec y = sim::simulate(d, cc, 20.0, o).y_end;
  const auto bc_cc = model::resolve(cc.phases().front().drive, 0.0, m);
  const double volts = sim::voltage(d, y, bc_cc);
  const auto bc_cv = model::resolve(model::OperatingMode::constant_voltage(volts).phases().front().drive, 0.0, m);
  const double worst = std::max(jacobian_mismatch(d, y, bc_cc), jacobian_mismatch(d, y, bc_cv));
  return {"analytic Jacobian = finite differences", worst < spec.jacobian_tol,
          fmt::format("max scaled mismatch {:.2e} < {:.0e} (CC and CV rows)", worst, spec.jacobian_tol)};
}

Gate kinetics_gate(const model::Model& m) {
  double odd = 0.0;
  bool monotone = true;
  for (double pe : {0.01, 0.3, 1.0, 4.0, 10.0}) {
    odd = std::max(odd, std::abs(m.bv_anode(pe).i + m.bv_anode(-pe).i) / std::abs(m.bv_anode(pe).i));
  }
  const double ce = 0.8, cs = 0.42, pe = -0.2;
  const double u = m.ocp_scaled(cs).value;
  for (double eta : {0.01, 0.3, 1.0, 4.0, 10.0}) {
    const double a = m.bv_cathode(ce, pe, cs, pe + u + eta).i, b = m.bv_cathode(ce, pe, cs, pe + u - eta).i;
    odd = std::max(odd, std::abs(a + b) / std::abs(a));
  }
  double prev_a = m.bv_anode(-20.0).i, prev_c = m.bv_cathode(ce, pe, cs, pe + u - 20.0).i;
  for (int k = -199; k <= 200; ++k) {
    const double x = 0.1 * k;
    const double a = m.bv_anode(x).i, c = m.bv_cathode(ce, pe, cs, pe + u + x).i;
    monotone = monotone && a < prev_a && c > prev_c;
    prev_a = a;
    prev_c = c;
  }
  return {"Butler-Volmer odd and monotone", odd < 1e-14 && monotone,
          fmt::format("odd defect {:.1e} < 1e-14, monotone {}", odd, monotone)};
}

Gate predictor_gate() {
  // Degree-3 polynomial in every component.
  auto poly = [](double t) -> coupling::CouplingValues {
    return {1 + t - 2 * t * t + 0.5 * t * t * t, -3 * t * t * t, 2.0, 0.25 * t};
  };
  coupling::Predictor pr;
  for (double t : {0.0, 0.3, 0.5, 1.1, 1.2}) pr.push(t, poly(t));
  double worst = 0.0;
  const auto e = pr.extrapolant(3);
  for (double t : {1.3, 1.7, 2.5}) {
    const auto a = e(t), b = poly(t);
    for (int q = 0; q < 4; ++q) worst = std::max(worst, std::abs(a[q] - b[q]) / std::max(1.0, std::abs(b[q])));
  }
  const auto in = pr.interpolant(3, 1.2, 1.6, poly(1.6));
  for (double t : {1.25, 1.4, 1.6}) {
    const auto a = in(t), b = poly(t);
    for (int q = 0; q < 4; ++q) worst = std::max(worst, std::abs(a[q] - b[q]) / std::max(1.0, std::abs(b[q])));
  }
  return {"predictor exact on cubics", worst < 1e-11, fmt::format("max deviation {:.1e} < 1e-11", worst)};
}

Gate midpoint_gate(const model::PhysicalParameters& p, double c_rate) {
  const auto cfg = oracle::AnalyticalConfig::from_c_rate(p, c_rate);
  double worst = 0.0;
  for (double t : {0.0, 0.1, 1.0, 5.0, 50.0, 500.0}) {
    const double c = oracle::ce_analytic(0.5 * p.len_electrolyte, t, cfg).value;
    worst = std::max(worst, std::abs(c - p.conc_electrolyte_init) / p.conc_electrolyte_init);
  }
  return {"oracle c_e(L_e/2, t) = c_e,I", worst < 1e-14, fmt::format("max deviation {:.1e} < 1e-14", worst)};
}

}  // namespace

std::vector<Gate> invariant_gates(const model::PhysicalParameters& p, const InvariantSpec& spec) {
  const model::Model m(p);
  std::vector<Gate> g;
  g.push_back(jacobian_gate(m, spec));

  OracleCheckSpec os;
  os.cells = spec.cells;
  os.t_end = spec.t_end;
  os.c_rate = spec.c_rate;
  const auto mono = oracle_check(p, os);
  g.push_back({"monolithic lithium balance per step", mono.max_lithium_defect < 1e-10,
               fmt::format("max defect {:.2e} < 1e-10 over {} steps", mono.max_lithium_defect, mono.steps)});

  const fv::Discretization d(m, fv::Grid::from_total(m, spec.cells));
  const double ts = m.scales().time_scale;
  const auto cc = model::OperatingMode::constant_current(spec.c_rate);
  const Vec y0 = sim::initial_state(d, cc);
  sim::MonolithicOptions o;
  o.rtol = 1e-12;
  o.store_steps = false;
  const Vec ref = sim::simulate(d, cc, spec.coupled_t_end, o, y0).y_end;
  coupling::CouplingConfig cfg;
  cfg.mode = coupling::CouplingMode::Implicit;
  cfg.order = 2;
  cfg.tol = spec.coupled_tol;
  cfg.dt_c_init = 0.01 / ts;
  coupling::CoupledSolver solver(d, sim::phase_boundary(m, cc.phases().front().drive, 0.0), cfg);
  const auto r = solver.run(y0, 0.0, spec.coupled_t_end / ts);
  g.push_back({"multi-domain lithium balance per interval", r.stats.max_lithium_defect < cfg.tol,
               fmt::format("max defect {:.2e} < tol {:.0e} over {} intervals", r.stats.max_lithium_defect, cfg.tol,
                           r.stats.intervals)});
  const double gap = relative_error(r.y_end, ref);
  g.push_back({"constant-current multi-domain = monolithic", gap < cfg.tol,
               fmt::format("relative difference {:.2e} < tol {:.0e}", gap, cfg.tol)});

  g.push_back(kinetics_gate(m));
  g.push_back(predictor_gate());
  g.push_back(midpoint_gate(p, spec.c_rate));
  return g;
}

}  // namespace cellkit::studies
