#include <algorithm>
#include <cmath>

#include "cellkit/fv/grid.hpp"
#include "cellkit/oracle/analytic.hpp"
#include "cellkit/studies/studies.hpp"

namespace cellkit::studies {

namespace {

struct FieldErrors {
  double ce, phie, cs;
};

// Relative l2 errors of the three oracle fields on the cell centres.
FieldErrors field_errors(const fv::Discretization& d, const Vec& y, double t, const oracle::AnalyticalConfig& cfg,
                         std::vector<OracleCheckResult::Profile>* profiles = nullptr) {
  const auto& g = d.grid();
  const auto& s = d.model().scales();
  Vec ce(g.n_e), ce_ref(g.n_e), pe(g.n_e), pe_ref(g.n_e), cs(g.n_am), cs_ref(g.n_am);
  for (int i = 0; i < g.n_e; ++i) {
    const double x = g.center(i) * s.length_scale;
    ce[i] = y[d.ce(i)] * s.conc_e_scale;
    ce_ref[i] = oracle::ce_analytic(x, t, cfg).value;
    pe[i] = y[d.pe(i)] * s.potential_scale;
    pe_ref[i] = oracle::phie_analytic(x, t, cfg);
    if (profiles) {
      profiles->push_back({"c_e", x, ce[i], ce_ref[i]});
      profiles->push_back({"phi_e", x, pe[i], pe_ref[i]});
    }
  }
  for (int j = 0; j < g.n_am; ++j) {
    const double xb = (g.center(g.n_e + j) - g.len_e) * s.length_scale;
    cs[j] = y[d.cs(j)] * s.conc_s_scale;
    cs_ref[j] = oracle::cs_analytic(xb, t, cfg).value;
    if (profiles) profiles->push_back({"c_s", xb, cs[j], cs_ref[j]});
  }
  return {relative_error(ce, ce_ref), relative_error(pe, pe_ref), relative_error(cs, cs_ref)};
}

}  // namespace

SpaceConvergenceResult space_convergence(const model::PhysicalParameters& p, const SpaceConvergenceSpec& spec) {
  const model::Model m(p);
  const auto cfg = oracle::AnalyticalConfig::from_c_rate(p, spec.c_rate);
  const auto mode = model::OperatingMode::constant_current(spec.c_rate);
  const double t_end = *std::max_element(spec.times.begin(), spec.times.end());
  SpaceConvergenceResult res;
  for (int n : spec.grids) {
    const fv::Discretization d(m, fv::Grid::from_total(m, n));
    sim::MonolithicOptions o;
    o.rtol = spec.rtol;
    o.store_steps = false;
    o.sample_times = spec.times;
    const auto r = sim::simulate(d, mode, t_end, o);
    const auto bc = model::resolve(mode.phases().front().drive, 0.0, m);
    for (std::size_t k = 0; k < r.samples.t.size(); ++k) {
      const double t = r.samples.t[k] * m.scales().time_scale;
      const auto e = field_errors(d, r.samples.y[k], t, cfg);
      const double u = sim::voltage(d, r.samples.y[k], bc);
      const double ua = oracle::cell_voltage_analytic(t, cfg);
      res.rows.push_back({n, d.grid().dx, t, e.ce, e.phie, e.cs, std::abs(u - ua) / std::abs(ua), r.stats.accepted});
    }
  }
  for (double t : spec.times) {
    std::vector<double> dx, ce, pe, cs;
    for (const auto& row : res.rows) {
      if (std::abs(row.t - t) > 1e-9 * std::max(1.0, t)) continue;
      dx.push_back(row.dx);
      ce.push_back(row.err_ce);
      pe.push_back(row.err_phie);
      cs.push_back(row.err_cs);
    }
    if (dx.size() < 2) continue;
    res.fits.push_back({"c_e", t, fit_loglog(dx, ce)});
    res.fits.push_back({"phi_e", t, fit_loglog(dx, pe)});
    res.fits.push_back({"c_s", t, fit_loglog(dx, cs)});
  }
  return res;
}

OracleCheckResult oracle_check(const model::PhysicalParameters& p, const OracleCheckSpec& spec) {
  const model::Model m(p);
  const auto cfg = oracle::AnalyticalConfig::from_c_rate(p, spec.c_rate);
  const auto mode = model::OperatingMode::constant_current(spec.c_rate);
  const fv::Discretization d(m, fv::Grid::from_total(m, spec.cells));
  sim::MonolithicOptions o;
  o.rtol = spec.rtol;
  o.store_steps = true;
  for (int k = 1; k <= spec.voltage_samples; ++k) o.sample_times.push_back(spec.t_end * k / spec.voltage_samples);
  const auto r = sim::simulate(d, mode, spec.t_end, o);
  const auto bc = model::resolve(mode.phases().front().drive, 0.0, m);

  OracleCheckResult res;
  const auto e = field_errors(d, r.y_end, spec.t_end, cfg, &res.profiles);
  res.err_ce = e.ce;
  res.err_phie = e.phie;
  res.err_cs = e.cs;
  for (std::size_t k = 0; k < r.samples.t.size(); ++k) {
    const double t = r.samples.t[k] * m.scales().time_scale;
    const double u = sim::voltage(d, r.samples.y[k], bc);
    const double ua = oracle::cell_voltage_analytic(t, cfg);
    res.t.push_back(t);
    res.u_sim.push_back(u);
    res.u_oracle.push_back(ua);
    res.err_voltage = std::max(res.err_voltage, std::abs(u - ua) / std::abs(ua));
  }
  res.steps = r.stats.accepted;
  for (std::size_t k = 0; k + 1 < r.steps.t.size(); ++k) {
    const auto a = fv::lithium_inventory(d, r.steps.y[k]);
    const auto b = fv::lithium_inventory(d, r.steps.y[k + 1]);
    const double defect = std::abs(b.total() - a.total() - fv::anode_flux_to_moles(d, r.step_flux[k])) / a.total();
    res.max_lithium_defect = std::max(res.max_lithium_defect, defect);
  }
  return res;
}

}  // namespace cellkit::studies
