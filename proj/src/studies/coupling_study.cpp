#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "cellkit/errors.hpp"
#include "cellkit/fv/grid.hpp"
#include "cellkit/studies/studies.hpp"

namespace cellkit::studies {

using coupling::CouplingConfig;
using coupling::CouplingMode;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// State at the start of the CV window and the voltage it holds.
struct CvStart {
  Vec y;
  double held_volts;
  model::OperatingMode hold;
};

CvStart cv_start(const fv::Discretization& d, const CvWindow& w) {
  sim::MonolithicOptions o;
  o.rtol = w.ref_rtol;
  o.store_steps = false;
  const auto cc = model::OperatingMode::constant_current(w.c_rate);
  const auto pre = sim::simulate(d, cc, w.t_ini, o);
  const auto bc_cc = model::resolve(cc.phases().front().drive, 0.0, d.model());
  const double held = sim::voltage(d, pre.y_end, bc_cc);
  auto hold = model::OperatingMode::constant_voltage(held);
  const auto bc = model::resolve(hold.phases().front().drive, 0.0, d.model());
  return {fv::consistent_init(d, pre.y_end, bc), held, std::move(hold)};
}

Vec monolithic_reference(const fv::Discretization& d, const model::OperatingMode& mode, const Vec& y0, double t0,
                         double t1, double rtol) {
  sim::MonolithicOptions o;
  o.rtol = rtol;
  o.store_steps = false;
  return sim::simulate(d, mode, t1, o, y0, t0).y_end;
}

coupling::CoupledResult run_window(const fv::Discretization& d, const model::OperatingMode& mode, const Vec& y0,
                                   double t0, double t1, const CouplingConfig& cfg) {
  const double ts = d.model().scales().time_scale;
  const auto bc = sim::phase_boundary(d.model(), mode.phases()[mode.phase_at(t0)].drive, 0.0);
  coupling::CoupledSolver solver(d, bc, cfg);
  return solver.run(y0, t0 / ts, t1 / ts);
}

}  // namespace

CouplingConvergenceResult coupling_convergence(const model::PhysicalParameters& p,
                                               const CouplingConvergenceSpec& spec) {
  const model::Model m(p);
  const fv::Discretization d(m, fv::Grid::from_total(m, spec.window.cells));
  const auto& w = spec.window;
  CouplingConvergenceResult res;

  struct Case {
    std::string drive;
    model::OperatingMode mode;
    Vec y0, ref;
    std::vector<int> orders;
    std::vector<CouplingMode> modes;
  };
  std::vector<Case> cases;
  {
    auto start = cv_start(d, w);
    res.held_volts = start.held_volts;
    Vec ref = monolithic_reference(d, start.hold, start.y, w.t_ini, w.t_end, w.ref_rtol);
    cases.push_back({"cv", start.hold, std::move(start.y), std::move(ref), spec.orders, spec.modes});
  }
  if (spec.cc_control) {
    const auto cc = model::OperatingMode::constant_current(w.c_rate);
    sim::MonolithicOptions o;
    o.rtol = w.ref_rtol;
    o.store_steps = false;
    Vec y0 = sim::simulate(d, cc, w.t_ini, o).y_end;
    Vec ref = monolithic_reference(d, cc, y0, w.t_ini, w.t_end, w.ref_rtol);
    cases.push_back({"cc", cc, std::move(y0), std::move(ref), {2}, {CouplingMode::Explicit}});
  }

  for (const auto& c : cases) {
    for (int order : c.orders) {
      for (CouplingMode mode : c.modes) {
        std::vector<double> nt, err;
        for (int n : spec.intervals) {
          CouplingConfig cfg;
          cfg.mode = mode;
          cfg.order = order;
          cfg.adaptive = false;
          cfg.fixed_intervals = n;
          cfg.wr_tol = spec.wr_tol;
          cfg.sub_rtol = spec.sub_rtol;
          cfg.sub_atol = 0.01 * spec.sub_rtol;
          const auto t0 = std::chrono::steady_clock::now();
          CouplingRow row{c.drive, order, mode, n, (w.t_end - w.t_ini) / n, 0.0, 0, 0.0};
          try {
            const auto r = run_window(d, c.mode, c.y0, w.t_ini, w.t_end, cfg);
            row.error = relative_error(r.y_end, c.ref);
            row.wr_iterations = r.stats.wr_iterations;
          } catch (const Error& e) {
            spdlog::warn("coupling sweep {} order {} {} N_t={} failed: {}", c.drive, order, coupling::to_string(mode),
                         n, e.what());
            row.error = std::numeric_limits<double>::infinity();
          }
          row.wall = seconds_since(t0);
          spdlog::info("coupling sweep {} order {} {} N_t={} error {:.3e} ({:.1f} s)", c.drive, order,
                       coupling::to_string(mode), n, row.error, row.wall);
          res.rows.push_back(row);
          nt.push_back(n);
          err.push_back(row.error);
        }
        if (c.drive == "cv" && nt.size() >= 2) res.fits.push_back({order, mode, fit_loglog(nt, err)});
      }
    }
  }
  return res;
}

model::OperatingMode sine_mode(const model::PhysicalParameters& p, const SineWindow& w) {
  const double mean = p.ocp(p.conc_solid_init / p.conc_solid_max);
  return model::OperatingMode::sine_voltage(mean, w.rel_amplitude, w.n_oscillations, w.duration);
}

AdaptiveResult sine_adaptive(const model::PhysicalParameters& p, const AdaptiveSpec& spec) {
  const model::Model m(p);
  const fv::Discretization d(m, fv::Grid::from_total(m, spec.window.cells));
  const double ts = m.scales().time_scale;
  const auto mode = sine_mode(p, spec.window);
  const auto bc = sim::phase_boundary(m, mode.phases().front().drive, 0.0);
  const Vec y0 = sim::initial_state(d, mode);

  AdaptiveResult res;
  sim::MonolithicOptions o;
  o.rtol = spec.window.ref_rtol;
  o.store_steps = false;
  const int n_samples = 500;
  for (int k = 1; k <= n_samples; ++k) o.sample_times.push_back(spec.window.duration * k / n_samples);
  const auto ref = sim::simulate(d, mode, spec.window.duration, o, y0);
  for (std::size_t k = 0; k < ref.samples.t.size(); ++k) {
    res.ref_t.push_back(ref.samples.t[k] * ts);
    res.ref_voltage.push_back(sim::voltage(d, ref.samples.y[k], bc(ref.samples.t[k])));
    res.ref_current_bv.push_back(d.interface_current(ref.samples.y[k].data()));
  }

  for (int order : spec.orders) {
    CouplingConfig cfg;
    cfg.mode = spec.mode;
    cfg.order = order;
    cfg.tol = spec.tol;
    cfg.wr_tol = spec.wr_tol;
    cfg.dt_c_init = spec.dt_c_init / ts;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_window(d, mode, y0, 0.0, spec.window.duration, cfg);
    AdaptiveSummary s{order, relative_error(r.y_end, ref.y_end), 0.0, 0.0, r.stats.intervals, r.stats.rejected,
                      r.stats.max_lithium_defect, seconds_since(t0)};
    std::size_t sync = 0;
    double prev_dt = -1.0;
    for (const auto& rep : r.reports) {
      AdaptiveInterval iv{order, rep.t * ts, rep.dt * ts, rep.epsilon, rep.wr_iterations, rep.accepted,
                          std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
      if (rep.accepted) {
        const Vec& y = r.sync.y[++sync];
        iv.voltage = sim::voltage(d, y, bc(rep.t + rep.dt));
        iv.current_bv = d.interface_current(y.data());
        if (prev_dt > 0.0) s.max_growth = std::max(s.max_growth, rep.dt / prev_dt);
        prev_dt = rep.dt;
        s.max_dt_c = std::max(s.max_dt_c, rep.dt * ts);
      }
      res.intervals.push_back(iv);
    }
    spdlog::info("sine adaptive order {}: error {:.3e}, max dt_c {:.3f} s, {} intervals, {} rejected ({:.1f} s)",
                 order, s.error, s.max_dt_c, s.intervals, s.rejected, s.wall);
    res.summary.push_back(s);
  }
  return res;
}

WorkPrecisionResult work_precision(const model::PhysicalParameters& p, const WorkPrecisionSpec& spec) {
  const model::Model m(p);
  const bool sine = spec.case_name == "sine";
  if (!sine && spec.case_name != "cv") throw ConfigError("work-precision case must be 'cv' or 'sine'");
  const int cells = sine ? spec.sine.cells : spec.cv.cells;
  const fv::Discretization d(m, fv::Grid::from_total(m, cells));
  const double ts = m.scales().time_scale;

  model::OperatingMode mode = model::OperatingMode::constant_current(1.0);
  Vec y0, ref;
  double t0 = 0.0, t1 = 0.0;
  if (sine) {
    mode = sine_mode(p, spec.sine);
    y0 = sim::initial_state(d, mode);
    t1 = spec.sine.duration;
    ref = monolithic_reference(d, mode, y0, t0, t1, spec.sine.ref_rtol);
  } else {
    auto start = cv_start(d, spec.cv);
    mode = start.hold;
    y0 = std::move(start.y);
    t0 = spec.cv.t_ini;
    t1 = spec.cv.t_end;
    ref = monolithic_reference(d, mode, y0, t0, t1, spec.cv.ref_rtol);
  }

  WorkPrecisionResult res;
  auto tols = spec.tols;
  std::sort(tols.begin(), tols.end(), std::greater<>());
  for (int order : spec.orders) {
    std::vector<double> errs, walls;
    for (double tol : tols) {
      CouplingConfig cfg;
      cfg.mode = spec.mode;
      cfg.order = order;
      cfg.tol = tol;
      cfg.dt_c_init = spec.dt_c_init / ts;
      coupling::CoupledResult r;
      bool failed = false;
      const double wall = median_wall_time(spec.repetitions, [&] {
        if (failed) return;
        try {
          r = run_window(d, mode, y0, t0, t1, cfg);
        } catch (const Error& e) {
          spdlog::warn("work-precision order {} tol {:.0e} failed: {}", order, tol, e.what());
          failed = true;
        }
      });
      if (failed) continue;
      WorkRow row{spec.case_name, order, tol, wall, relative_error(r.y_end, ref), r.stats.intervals, r.stats.rejected};
      spdlog::info("work-precision {} order {} tol {:.0e}: error {:.3e}, {:.2f} s", spec.case_name, order, tol,
                   row.error, row.wall);
      res.rows.push_back(row);
      errs.push_back(row.error);
      walls.push_back(row.wall);
      if (row.error < 0.1 * spec.target || row.wall > spec.time_cap) break;
    }
    TargetTime tt{order, interpolate_loglog(errs, walls, spec.target), false};
    if (std::isnan(tt.wall)) {
      tt.wall = extrapolate_loglog(errs, walls, spec.target);
      tt.extrapolated = !std::isnan(tt.wall);
    }
    res.time_at_target.push_back(tt);
  }
  return res;
}

}  // namespace cellkit::studies
