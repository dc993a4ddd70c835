#include "cellkit/coupling/coupled.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include <Eigen/LU>
#include <spdlog/spdlog.h>

#include "cellkit/errors.hpp"

namespace cellkit::coupling {

using fv::Block;

CouplingMode mode_from_string(const std::string& s) {
  if (s == "explicit") return CouplingMode::Explicit;
  if (s == "implicit") return CouplingMode::Implicit;
  throw ConfigError("coupling mode must be 'explicit' or 'implicit', got '" + s + "'");
}

const char* to_string(CouplingMode m) { return m == CouplingMode::Explicit ? "explicit" : "implicit"; }

void CouplingConfig::validate() const {
  std::ostringstream err;
  if (order < 1 || order > 4) err << "coupling order must lie in [1, 4]; ";
  if (!(tol > 0.0)) err << "coupling tol must be > 0; ";
  if (!(wr_tol > 0.0)) err << "wr_tol must be > 0; ";
  if (max_wr_iterations < 1) err << "max_wr_iterations must be >= 1; ";
  if (!(dt_c_init > 0.0) || !(dt_c_min > 0.0) || !(dt_c_max >= dt_c_min)) err << "invalid coupling step bounds; ";
  if (!(growth_cap > 1.0)) err << "growth_cap must be > 1; ";
  if (!(reject_cap > 0.0 && reject_cap <= 1.0)) err << "reject_cap must be in (0, 1]; ";
  if (!adaptive && fixed_intervals < 1) err << "fixed-interval mode needs fixed_intervals >= 1; ";
  if (threads < 1) err << "threads must be >= 1; ";
  const std::string s = err.str();
  if (!s.empty()) throw ConfigError("coupling: " + s.substr(0, s.size() - 2));
}

double CouplingConfig::effective_sub_rtol() const { return sub_rtol > 0.0 ? sub_rtol : 0.1 * tol; }
double CouplingConfig::effective_sub_atol() const { return sub_atol > 0.0 ? sub_atol : 0.01 * effective_sub_rtol(); }

CouplingValues coupling_values(const fv::Discretization& disc, const Vec& y) {
  return {y[disc.aux(2)], y[disc.aux(3)], y[disc.aux(4)], y[disc.aux(5)]};
}

double interface_determinant(const fv::Discretization& disc, const Vec& y) {
  const int base = disc.aux(2);
  dae::Triplets t;
  disc.jacobian(y.data(), model::ExternalCondition::current(0.0), t);
  Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
  for (std::size_t e = 0; e < t.size(); ++e) {
    const int r = t.row[e] - base, c = t.col[e] - base;
    if (r >= 0 && r < 4 && c >= 0 && c < 4) J(r, c) += t.val[e];
  }
  return J.determinant();
}

CouplingValues sync_solve(const fv::Discretization& disc, Vec& y, const model::ExternalCondition& bc, double tol) {
  // Holding the sub-problem potentials fixed and solving only the interface
  // rows turns the potential exchange into an algebraic loop whose error is
  // amplified by extrapolation; projecting all potentials keeps it O(dt_c).
  y = fv::consistent_init(disc, y, bc, tol);
  const double det = interface_determinant(disc, y);
  if (!std::isfinite(det) || std::abs(det) < 1e-300) throw SingularMatrix("sync_solve: interface Jacobian is singular");
  return coupling_values(disc, y);
}

StepDecision adapt_dt(double dt, double epsilon, double tol, int p, const CouplingConfig& cfg) {
  if (!(epsilon >= 0.0)) throw Error("adapt_dt: epsilon must be >= 0");
  const double upper = std::min(cfg.dt_c_max, cfg.growth_cap * dt);
  double next = epsilon == 0.0 ? upper : dt * std::pow(tol / epsilon, 1.0 / p);
  const bool accept = epsilon <= tol;
  if (!accept) next = std::min(next, cfg.reject_cap * dt);
  if (!accept && next < cfg.dt_c_min) {
    std::ostringstream os;
    os << "coupling step " << next << " below dt_c_min " << cfg.dt_c_min;
    throw StepSizeUnderflow(os.str());
  }
  return {std::clamp(next, cfg.dt_c_min, upper), accept};
}

CoupledSolver::CoupledSolver(const fv::Discretization& disc, fv::BoundaryProvider bc, CouplingConfig cfg)
    : disc_(disc),
      bc_(std::move(bc)),
      cfg_(cfg),
      elec_(disc, Block::Electrolyte, bc_, nullptr),
      solid_(disc, Block::Solid, bc_, nullptr),
      hist_(8) {
  cfg_.validate();
}

void CoupledSolver::integrate_subs(const Vec& y_n, double t_n, double dt, const Interpolant& foreign, Cycle& out) {
  elec_.set_foreign([&foreign](double t) {
    const auto u = foreign(t);
    return std::array<double, 2>{u[2], u[3]};
  });
  solid_.set_foreign([&foreign](double t) {
    const auto u = foreign(t);
    return std::array<double, 2>{u[0], u[1]};
  });
  dae::IntegratorOptions o;
  o.control.rtol = cfg_.effective_sub_rtol();
  o.control.atol = cfg_.effective_sub_atol();
  o.store_steps = false;

  struct Job {
    fv::SubSystem* sys;
    double* h;
    dae::IntegrationResult res;
    std::exception_ptr error;
  };
  Job jobs[2] = {{&elec_, &h_elec_, {}, nullptr}, {&solid_, &h_solid_, {}, nullptr}};
  auto work = [&](Job& j) {
    try {
      auto oj = o;
      oj.control.initial_dt = *j.h > 0.0 ? std::min(*j.h, dt) : 0.0;
      dae::Integrator in(*j.sys, dae::radau_iia(3), oj);
      // The synchronization moves the interface unknowns, so the algebraic
      // part of each sub-state is re-projected before integrating.
      const Vec ys = fv::consistent_init(*j.sys, t_n, j.sys->extract(y_n), 1e-13);
      j.res = in.integrate(ys, t_n, t_n + dt);
      *j.h = j.res.stats.last_dt;
    } catch (...) {
      j.error = std::current_exception();
    }
  };
  if (cfg_.threads > 1) {
    std::thread th(work, std::ref(jobs[0]));
    work(jobs[1]);
    th.join();
  } else {
    work(jobs[0]);
    work(jobs[1]);
  }
  for (auto& j : jobs)
    if (j.error) std::rethrow_exception(j.error);

  out.y = y_n;
  elec_.insert(jobs[0].res.y_end, out.y);
  solid_.insert(jobs[1].res.y_end, out.y);
  out.newton_iterations += jobs[0].res.stats.newton_iterations + jobs[1].res.stats.newton_iterations;
  out.steps += jobs[0].res.stats.accepted + jobs[1].res.stats.accepted;
  out.anode_integral = jobs[0].res.stats.flux_integral;
  out.u = sync_solve(disc_, out.y, bc_(t_n + dt));
}

CoupledSolver::Cycle CoupledSolver::run_cycle(const Vec& y_n, double t_n, double dt, int degree) {
  Cycle c;
  const int avail = static_cast<int>(hist_.size()) - 1;
  const Interpolant ext = hist_.extrapolant(cfg_.mode == CouplingMode::Explicit ? degree : std::min(degree, avail));
  if (cfg_.mode == CouplingMode::Explicit) {
    integrate_subs(y_n, t_n, dt, ext, c);
    c.wr_iterations = 1;
    return c;
  }
  CouplingValues uk = ext(t_n + dt);
  c.wr_converged = false;
  for (int k = 1; k <= cfg_.max_wr_iterations; ++k) {
    const Interpolant poly = hist_.interpolant(degree, t_n, t_n + dt, uk);
    integrate_subs(y_n, t_n, dt, poly, c);
    c.wr_iterations = k;
    double diff = 0.0, norm = 0.0;
    for (int q = 0; q < 4; ++q) {
      diff += (c.u[q] - uk[q]) * (c.u[q] - uk[q]);
      norm += uk[q] * uk[q];
    }
    uk = c.u;
    if (std::sqrt(diff) / (cfg_.wr_tol * std::sqrt(norm) + 0.1 * cfg_.wr_tol) < 1.0) {
      c.wr_converged = true;
      break;
    }
  }
  if (!c.wr_converged)
    spdlog::debug("waveform relaxation did not converge in {} iterations at t = {}", cfg_.max_wr_iterations, t_n);
  return c;
}

Vec CoupledSolver::monolithic(const Vec& y_n, double t_n, double t_end, double& anode_integral) {
  fv::FullSystem sys(disc_, bc_);
  dae::IntegratorOptions o;
  o.control.rtol = cfg_.effective_sub_rtol();
  o.control.atol = cfg_.effective_sub_atol();
  o.store_steps = false;
  dae::Integrator in(sys, dae::radau_iia(3), o);
  auto r = in.integrate(y_n, t_n, t_end);
  anode_integral = r.stats.flux_integral;
  return r.y_end;
}

CoupledResult CoupledSolver::run(const Vec& y0, double t0, double t1) {
  if (!(t1 > t0)) throw ConfigError("coupled run: end time must exceed start time");
  CoupledResult res;
  hist_.clear();
  h_elec_ = h_solid_ = 0.0;
  Vec y = y0;
  hist_.push(t0, sync_solve(disc_, y, bc_(t0)));
  res.sync.t.push_back(t0);
  res.sync.y.push_back(y);
  const bool implicit = cfg_.mode == CouplingMode::Implicit;
  auto max_degree = [&] { return static_cast<int>(hist_.size()) - (implicit ? 0 : 1); };

  auto record = [&](CouplingStepReport rep, const Vec& y_new, double anode_integral, double t_new) {
    const auto before = fv::lithium_inventory(disc_, y);
    const auto after = fv::lithium_inventory(disc_, y_new);
    rep.lithium_defect =
        std::abs(after.total() - before.total() - fv::anode_flux_to_moles(disc_, anode_integral)) / before.total();
    res.stats.max_lithium_defect = std::max(res.stats.max_lithium_defect, rep.lithium_defect);
    res.stats.max_dt = std::max(res.stats.max_dt, rep.dt);
    res.stats.wr_unconverged += !rep.wr_converged;
    ++res.stats.intervals;
    y = y_new;
    res.sync.t.push_back(t_new);
    res.sync.y.push_back(y);
    res.reports.push_back(rep);
  };

  if (!cfg_.adaptive) {
    const int n = cfg_.fixed_intervals;
    const int degree = cfg_.order - 1;
    for (int k = 0; k < n; ++k) {
      const double tn = t0 + (t1 - t0) * k / n;
      const double tn1 = k + 1 == n ? t1 : t0 + (t1 - t0) * (k + 1) / n;
      CouplingStepReport rep;
      rep.t = tn;
      rep.dt = rep.dt_next = tn1 - tn;
      if (max_degree() < degree && cfg_.monolithic_start) {
        double flux = 0.0;
        Vec y_new = monolithic(y, tn, tn1, flux);
        hist_.push(tn1, coupling_values(disc_, y_new));
        rep.degree = -1;
        record(rep, y_new, flux, tn1);
        continue;
      }
      const int d = std::min(degree, max_degree());
      Cycle c = run_cycle(y, tn, tn1 - tn, d);
      rep.degree = d;
      rep.wr_iterations = c.wr_iterations;
      rep.wr_converged = c.wr_converged;
      rep.newton_iterations = c.newton_iterations;
      res.stats.wr_iterations += c.wr_iterations;
      res.stats.newton_iterations += c.newton_iterations;
      res.stats.sub_steps += c.steps;
      hist_.push(tn1, c.u);
      record(rep, c.y, c.anode_integral, tn1);
    }
    res.y_end = y;
    return res;
  }

  double t = t0;
  double dt = std::min(cfg_.dt_c_init, t1 - t0);
  while (t < t1) {
    CouplingStepReport rep;
    rep.t = t;
    rep.dt = dt;
    const int p = std::min(cfg_.order, max_degree());
    Cycle hi;
    try {
      if (p == 0) {
        // Warm-up: a single degree-0 cycle at the prescribed initial step.
        hi = run_cycle(y, t, dt, 0);
        rep.epsilon = 0.0;
        rep.dt_next = dt;
        rep.degree = 0;
      } else {
        Cycle lo = run_cycle(y, t, dt, p - 1);
        hi = run_cycle(y, t, dt, p);
        double e2 = 0.0;
        for (int q = 0; q < 4; ++q) e2 += (hi.u[q] - lo.u[q]) * (hi.u[q] - lo.u[q]);
        rep.epsilon = std::sqrt(e2);
        rep.degree = p;
        rep.wr_iterations = lo.wr_iterations;
        rep.newton_iterations = lo.newton_iterations;
        res.stats.sub_steps += lo.steps;
        const auto dec = adapt_dt(dt, rep.epsilon, cfg_.tol, p, cfg_);
        rep.dt_next = dec.dt_next;
        rep.accepted = dec.accept;
      }
    } catch (const StepSizeUnderflow&) {
      throw;
    } catch (const Error& e) {
      // A failed sub-integration or synchronization: retry on a shorter interval.
      rep.accepted = false;
      rep.dt_next = 0.25 * dt;
      spdlog::debug("coupling interval at t = {} failed ({}); retrying with dt_c = {}", t, e.what(), rep.dt_next);
      if (rep.dt_next < cfg_.dt_c_min) {
        std::ostringstream os;
        os << "coupling failed at t = " << t << ": " << e.what();
        throw StepSizeUnderflow(os.str());
      }
    }
    rep.wr_iterations += hi.wr_iterations;
    rep.wr_converged = hi.wr_converged;
    rep.newton_iterations += hi.newton_iterations;
    res.stats.wr_iterations += rep.wr_iterations;
    res.stats.newton_iterations += rep.newton_iterations;
    res.stats.sub_steps += hi.steps;
    if (!rep.accepted) {
      ++res.stats.rejected;
      res.reports.push_back(rep);
      dt = rep.dt_next;
      continue;
    }
    const double t_new = (t1 - (t + dt) <= 1e-12 * std::max(1.0, std::abs(t1))) ? t1 : t + dt;
    hist_.push(t_new, hi.u);
    record(rep, hi.y, hi.anode_integral, t_new);
    t = t_new;
    dt = std::min(rep.dt_next, t1 - t);
  }
  res.y_end = y;
  return res;
}

}  // namespace cellkit::coupling
