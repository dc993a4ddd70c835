#include "cellkit/sim/simulate.hpp"

#include <algorithm>

#include "cellkit/errors.hpp"

namespace cellkit::sim {

fv::BoundaryProvider phase_boundary(const model::Model& m, const model::Drive& drive, double held_volts) {
  const double ts = m.scales().time_scale;
  if (std::holds_alternative<model::SineVoltage>(drive)) {
    return [&m, drive, ts, held_volts](double t) { return model::resolve(drive, t * ts, m, held_volts); };
  }
  return fv::constant_boundary(model::resolve(drive, 0.0, m, held_volts));
}

Vec initial_state(const fv::Discretization& disc, const model::OperatingMode& mode) {
  const auto bc = model::resolve(mode.phases().front().drive, 0.0, disc.model());
  return fv::consistent_init(disc, disc.initial_guess(), bc);
}

double voltage(const fv::Discretization& disc, const Vec& y, const model::ExternalCondition& bc) {
  return disc.cell_voltage(y.data(), bc) * disc.model().scales().potential_scale;
}

namespace {

dae::IntegratorOptions integrator_options(const MonolithicOptions& o, double ts) {
  dae::IntegratorOptions io;
  io.control.rtol = o.rtol;
  io.control.atol = o.atol > 0.0 ? o.atol : 0.01 * o.rtol;
  if (o.fixed_dt > 0.0) io.control.fixed_dt = o.fixed_dt / ts;
  io.store_steps = o.store_steps;
  return io;
}

void add_stats(dae::IntegrationStats& a, const dae::IntegrationStats& b) {
  a.accepted += b.accepted;
  a.rejected += b.rejected;
  a.newton_iterations += b.newton_iterations;
  a.newton_failures += b.newton_failures;
  a.jacobian_evaluations += b.jacobian_evaluations;
  a.factorizations += b.factorizations;
  a.flux_integral += b.flux_integral;
  a.last_dt = b.last_dt;
  a.max_dt = std::max(a.max_dt, b.max_dt);
}

// Phase intervals [begin, end) clipped to [t0, t1], in seconds.
struct Span {
  std::size_t phase;
  double begin, end;
};

std::vector<Span> spans(const model::OperatingMode& mode, double t0, double t1) {
  std::vector<Span> out;
  const auto& ph = mode.phases();
  for (std::size_t k = mode.phase_at(t0); k < ph.size(); ++k) {
    const double b = std::max(t0, ph[k].t_begin);
    const double e = k + 1 < ph.size() ? std::min(t1, ph[k + 1].t_begin) : t1;
    if (b >= t1) break;
    if (e > b) out.push_back({k, b, e});
  }
  return out;
}

}  // namespace

SimulationResult simulate(const fv::Discretization& disc, const model::OperatingMode& mode, double t_end_s,
                          const MonolithicOptions& opts, const std::optional<Vec>& y0, double t0_s,
                          double held_volts) {
  if (!(t_end_s > t0_s)) throw ConfigError("simulation end time must exceed its start time");
  const auto& m = disc.model();
  const double ts = m.scales().time_scale;
  const auto scheme = dae::scheme_by_name(opts.scheme);
  SimulationResult res;
  res.held_volts = held_volts;
  Vec y = y0 ? *y0 : initial_state(disc, mode);
  const auto parts = spans(mode, t0_s, t_end_s);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& sp = parts[p];
    const auto& drive = mode.phases()[sp.phase].drive;
    if (p > 0) {
      // Hold phases keep the voltage the previous phase ended with.
      const auto prev = phase_boundary(m, mode.phases()[parts[p - 1].phase].drive, res.held_volts);
      res.held_volts = voltage(disc, y, prev(sp.begin / ts));
    }
    const auto bc = phase_boundary(m, drive, res.held_volts);
    if (p > 0) y = fv::consistent_init(disc, y, bc(sp.begin / ts));
    fv::FullSystem sys(disc, bc);
    auto io = integrator_options(opts, ts);
    for (double s : opts.sample_times)
      if (s > sp.begin && s <= sp.end) io.sample_times.push_back(s / ts);
    if (p == 0 && !opts.sample_times.empty() &&
        std::find(opts.sample_times.begin(), opts.sample_times.end(), t0_s) != opts.sample_times.end()) {
      res.samples.t.push_back(t0_s / ts);
      res.samples.y.push_back(y);
    }
    dae::Integrator in(sys, scheme, io);
    auto r = in.integrate(y, sp.begin / ts, sp.end / ts);
    for (std::size_t k = 0; k < r.steps.t.size(); ++k) {
      if (!res.steps.t.empty() && r.steps.t[k] <= res.steps.t.back()) continue;
      if (k > 0) res.step_flux.push_back(r.step_flux[k - 1]);
      res.steps.t.push_back(r.steps.t[k]);
      res.step_voltage.push_back(voltage(disc, r.steps.y[k], bc(r.steps.t[k])));
      res.steps.y.push_back(std::move(r.steps.y[k]));
    }
    for (std::size_t k = 0; k < r.samples.t.size(); ++k) {
      res.samples.t.push_back(r.samples.t[k]);
      res.samples.y.push_back(std::move(r.samples.y[k]));
    }
    add_stats(res.stats, r.stats);
    y = std::move(r.y_end);
  }
  res.y_end = std::move(y);
  return res;
}

CoupledSimulationResult simulate_coupled(const fv::Discretization& disc, const model::OperatingMode& mode,
                                         double coupled_from_s, double t_end_s, const coupling::CouplingConfig& cfg,
                                         const MonolithicOptions& pre_opts) {
  if (!(t_end_s > coupled_from_s) || coupled_from_s < 0.0)
    throw ConfigError("coupled window must satisfy 0 <= start < end");
  const auto& m = disc.model();
  const double ts = m.scales().time_scale;
  const std::size_t phase = mode.phase_at(coupled_from_s);
  const auto& ph = mode.phases();
  if (phase + 1 < ph.size() && ph[phase + 1].t_begin < t_end_s)
    throw ConfigError("coupled window must lie inside one operating phase");

  CoupledSimulationResult out;
  Vec y;
  double held = 0.0;
  if (coupled_from_s > 0.0) {
    auto pre = pre_opts;
    pre.store_steps = false;
    out.pre = simulate(disc, mode, coupled_from_s, pre);
    y = out.pre.y_end;
    held = out.pre.held_volts;
    if (ph[phase].t_begin == coupled_from_s && phase > 0) {
      const auto prev = phase_boundary(m, ph[phase - 1].drive, held);
      held = voltage(disc, y, prev(coupled_from_s / ts));
      out.pre.held_volts = held;
    }
  } else {
    y = initial_state(disc, mode);
  }
  const auto bc = phase_boundary(m, ph[phase].drive, held);
  y = fv::consistent_init(disc, y, bc(coupled_from_s / ts));
  coupling::CoupledSolver solver(disc, bc, cfg);
  out.coupled = solver.run(y, coupled_from_s / ts, t_end_s / ts);
  out.final_bc = bc(t_end_s / ts);
  return out;
}

}  // namespace cellkit::sim
