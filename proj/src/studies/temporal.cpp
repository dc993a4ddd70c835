#include <spdlog/spdlog.h>

#include "cellkit/fv/grid.hpp"
#include "cellkit/studies/studies.hpp"

namespace cellkit::studies {

TemporalOrderResult temporal_order(const model::PhysicalParameters& p, const TemporalOrderSpec& spec) {
  const model::Model m(p);
  const fv::Discretization d(m, fv::Grid::from_total(m, spec.cells));
  const SineWindow w{spec.cells, spec.rel_amplitude, spec.n_oscillations, spec.t_end, spec.ref_rtol};
  const auto mode = sine_mode(p, w);
  const Vec y0 = sim::initial_state(d, mode);

  sim::MonolithicOptions ro;
  ro.rtol = spec.ref_rtol;
  ro.store_steps = false;
  const Vec ref = sim::simulate(d, mode, spec.t_end, ro, y0).y_end;

  TemporalOrderResult res;
  for (const auto& scheme : spec.schemes) {
    const auto& steps = scheme == "implicit_euler" ? spec.euler_steps : spec.radau_steps;
    std::vector<double> dts, errs;
    for (int n : steps) {
      sim::MonolithicOptions o;
      o.scheme = scheme;
      o.fixed_dt = spec.t_end / n;
      o.store_steps = false;
      const auto r = sim::simulate(d, mode, spec.t_end, o, y0);
      TemporalRow row{scheme, n, o.fixed_dt, relative_error(r.y_end, ref)};
      spdlog::info("temporal {} steps {} error {:.3e}", scheme, n, row.error);
      res.rows.push_back(row);
      dts.push_back(row.dt);
      errs.push_back(row.error);
    }
    if (dts.size() >= 2) res.fits.emplace_back(scheme, fit_loglog(dts, errs));
  }
  return res;
}

}  // namespace cellkit::studies
