#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cellkit/fv/grid.hpp"
#include "cellkit/io/config.hpp"
#include "cellkit/io/output.hpp"
#include "cellkit/studies/gates.hpp"

using namespace cellkit;
using nlohmann::json;
using dae::Vec;

namespace {

constexpr int kOk = 0;
constexpr int kNumerical = 1;
constexpr int kConfig = 2;

struct Options {
  std::string config;
  std::string out;
  int threads = 0;
  bool verbose = false;
};

json fit_json(const studies::SlopeFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}, {"points", f.points}};
}

json gates_json(const std::vector<studies::Gate>& gates) {
  json arr = json::array();
  for (const auto& g : gates) arr.push_back({{"name", g.name}, {"pass", g.pass}, {"detail", g.detail}});
  return arr;
}

void add_fit(io::CsvTable& t, const std::string& name, const std::string& key, const studies::SlopeFit& f) {
  t.add({name, key, f.slope, f.intercept, f.residual, f.points});
}

io::CsvTable fit_table() { return io::CsvTable({"fit", "key", "slope", "intercept", "residual", "points"}); }

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// ---------------------------------------------------------------------------
// run

void add_state_rows(io::CsvTable& t, const fv::Discretization& d, const Vec& y, double t_nd, double volts) {
  const auto& s = d.model().scales();
  const auto li = fv::lithium_inventory(d, y);
  t.add({t_nd * s.time_scale, t_nd, volts, d.interface_current(y.data()), li.electrolyte, li.solid});
}

io::CsvTable profile_table(const fv::Discretization& d, const Vec& y) {
  const auto& g = d.grid();
  const auto& s = d.model().scales();
  io::CsvTable t({"field", "cell", "x_m", "x_nd", "value_nd", "value_si"});
  for (int i = 0; i < g.n_e; ++i) {
    const double x = g.center(i);
    t.add({"c_e", i, x * s.length_scale, x, y[d.ce(i)], y[d.ce(i)] * s.conc_e_scale});
    t.add({"phi_e", i, x * s.length_scale, x, y[d.pe(i)], y[d.pe(i)] * s.potential_scale});
  }
  for (int j = 0; j < g.n_s(); ++j) {
    const double x = g.center(g.n_e + j);
    if (j < g.n_am) t.add({"c_s", j, x * s.length_scale, x, y[d.cs(j)], y[d.cs(j)] * s.conc_s_scale});
    t.add({"phi_s", j, x * s.length_scale, x, y[d.ps(j)], y[d.ps(j)] * s.potential_scale});
  }
  return t;
}

json run(const io::RunConfig& cfg, io::OutputSet& out, int threads) {
  const model::Model m(cfg.physics());
  const fv::Discretization d(m, fv::Grid::from_total(m, cfg.cells()));
  const auto mode = cfg.operating_mode();
  const double ts = m.scales().time_scale;
  const double t_end = cfg.t_end();
  const int samples = cfg.get<int>("mode.samples");

  auto opts = cfg.solver();
  const double mono_end = cfg.coupled() ? cfg.coupled_from() : t_end;
  if (samples > 0) {
    opts.store_steps = false;
    opts.sample_times.push_back(0.0);
    for (int k = 1; k <= samples; ++k) {
      const double t = t_end * k / samples;
      if (t <= mono_end) opts.sample_times.push_back(t);
    }
  }

  io::CsvTable traj({"t_s", "t_nd", "voltage_V", "current_bv_A_m2", "li_electrolyte_mol_m2", "li_solid_mol_m2"});
  json summary;
  auto bc_at = [&](double t_nd, double held) {
    return sim::phase_boundary(m, mode.phases()[mode.phase_at(t_nd * ts)].drive, held)(t_nd);
  };
  auto emit = [&](const dae::Trajectory& tr, double held) {
    for (std::size_t k = 0; k < tr.t.size(); ++k)
      add_state_rows(traj, d, tr.y[k], tr.t[k], sim::voltage(d, tr.y[k], bc_at(tr.t[k], held)));
  };

  Vec y_end;
  double held = 0.0;
  if (!cfg.coupled()) {
    const auto r = sim::simulate(d, mode, t_end, opts);
    held = r.held_volts;
    emit(samples > 0 ? r.samples : r.steps, held);
    y_end = r.y_end;
    summary["steps"] = r.stats.accepted;
    summary["rejected"] = r.stats.rejected;
    summary["newton_iterations"] = r.stats.newton_iterations;
  } else {
    auto cc = cfg.coupling(ts);
    cc.threads = std::min(threads, 2);
    const auto r = sim::simulate_coupled(d, mode, cfg.coupled_from(), t_end, cc, opts);
    held = r.pre.held_volts;
    if (cfg.coupled_from() > 0.0) emit(samples > 0 ? r.pre.samples : r.pre.steps, held);
    emit(r.coupled.sync, held);
    y_end = r.coupled.y_end;

    io::CsvTable iv({"t_s", "dt_c_s", "dt_next_s", "epsilon", "degree", "wr_iterations", "wr_converged", "accepted",
                     "lithium_defect"});
    for (const auto& rep : r.coupled.reports)
      iv.add({rep.t * ts, rep.dt * ts, rep.dt_next * ts, rep.epsilon, rep.degree, rep.wr_iterations, rep.wr_converged,
              rep.accepted, rep.lithium_defect});
    out.write("coupling_intervals.csv", iv);
    const auto& st = r.coupled.stats;
    summary["coupling"] = {{"intervals", st.intervals},         {"rejected", st.rejected},
                           {"wr_iterations", st.wr_iterations}, {"wr_unconverged", st.wr_unconverged},
                           {"newton_iterations", st.newton_iterations},
                           {"sub_steps", st.sub_steps},         {"max_dt_c_s", st.max_dt * ts},
                           {"max_lithium_defect", st.max_lithium_defect}};
  }
  out.write("trajectory.csv", traj);
  out.write("profiles_final.csv", profile_table(d, y_end));
  summary["held_voltage_V"] = held;
  summary["final_voltage_V"] = sim::voltage(d, y_end, bc_at(t_end / ts, held));
  summary["final_current_bv_A_m2"] = d.interface_current(y_end.data());
  return summary;
}

// ---------------------------------------------------------------------------
// studies

json oracle(const io::RunConfig& cfg, io::OutputSet& out) {
  const auto r = studies::oracle_check(cfg.physics(), cfg.oracle_spec());
  io::CsvTable v({"t_s", "voltage_sim_V", "voltage_oracle_V", "rel_error"});
  for (std::size_t k = 0; k < r.t.size(); ++k)
    v.add({r.t[k], r.u_sim[k], r.u_oracle[k], std::abs(r.u_sim[k] - r.u_oracle[k]) / std::abs(r.u_oracle[k])});
  io::CsvTable p({"field", "x_m", "sim", "oracle"});
  for (const auto& pr : r.profiles) p.add({pr.field, pr.x, pr.sim, pr.oracle});
  out.write("oracle_voltage.csv", v);
  out.write("oracle_profiles.csv", p);
  const auto gates = studies::oracle_gates(r);
  return {{"err_c_e", r.err_ce},     {"err_phi_e", r.err_phie},
          {"err_c_s", r.err_cs},     {"err_voltage", r.err_voltage},
          {"steps", r.steps},        {"max_lithium_defect", r.max_lithium_defect},
          {"gates", gates_json(gates)}, {"pass", studies::all_pass(gates)}};
}

json converge_space(const io::RunConfig& cfg, io::OutputSet& out) {
  const auto part = cfg.get<std::string>("study.part");
  const auto p = cfg.physics();
  json summary;
  std::vector<studies::Gate> all;
  if (part == "all" || part == "space") {
    const auto r = studies::space_convergence(p, cfg.space_spec());
    io::CsvTable t({"cells", "dx_nd", "t_s", "err_c_e", "err_phi_e", "err_c_s", "err_voltage", "steps"});
    for (const auto& row : r.rows)
      t.add({row.cells, row.dx, row.t, row.err_ce, row.err_phie, row.err_cs, row.err_voltage, row.steps});
    auto f = fit_table();
    for (const auto& fit : r.fits) add_fit(f, fit.field, fmt::format("{}", fit.t), fit.fit);
    out.write("space_convergence.csv", t);
    out.write("space_fits.csv", f);
    const auto g = studies::space_gates(r);
    summary["space"] = gates_json(g);
    all.insert(all.end(), g.begin(), g.end());
  }
  if (part == "all" || part == "temporal") {
    const auto r = studies::temporal_order(p, cfg.temporal_spec());
    io::CsvTable t({"scheme", "steps", "dt_s", "error"});
    for (const auto& row : r.rows) t.add({row.scheme, row.steps, row.dt, row.error});
    auto f = fit_table();
    for (const auto& [scheme, fit] : r.fits) add_fit(f, scheme, "dt", fit);
    out.write("temporal_order.csv", t);
    out.write("temporal_fits.csv", f);
    const auto g = studies::temporal_gates(r);
    summary["temporal"] = gates_json(g);
    all.insert(all.end(), g.begin(), g.end());
  }
  if (all.empty()) throw ConfigError("study.part must be all, space or temporal for converge-space");
  summary["pass"] = studies::all_pass(all);
  return summary;
}

json converge_coupling(const io::RunConfig& cfg, io::OutputSet& out) {
  const auto part = cfg.get<std::string>("study.part");
  const auto p = cfg.physics();
  json summary;
  std::vector<studies::Gate> all;
  if (part == "all" || part == "fixed") {
    const auto r = studies::coupling_convergence(p, cfg.coupling_spec());
    io::CsvTable t({"drive", "order", "degree", "mode", "intervals", "dt_c_s", "error", "wr_iterations", "wall_s"});
    for (const auto& row : r.rows)
      t.add({row.drive, row.order, row.order - 1, coupling::to_string(row.mode), row.intervals, row.dt_c, row.error,
             row.wr_iterations, row.wall});
    auto f = fit_table();
    for (const auto& fit : r.fits)
      add_fit(f, fmt::format("order{}", fit.order), coupling::to_string(fit.mode), fit.fit);
    out.write("coupling_convergence.csv", t);
    out.write("coupling_fits.csv", f);
    const auto g = studies::coupling_gates(r);
    summary["fixed"] = {{"held_voltage_V", r.held_volts}, {"gates", gates_json(g)}};
    all.insert(all.end(), g.begin(), g.end());
  }
  if (part == "all" || part == "adaptive") {
    const auto spec = cfg.adaptive_spec();
    const auto r = studies::sine_adaptive(p, spec);
    io::CsvTable iv({"order", "t_s", "dt_c_s", "epsilon", "wr_iterations", "accepted", "voltage_V", "current_bv_A_m2"});
    for (const auto& x : r.intervals)
      iv.add({x.order, x.t, x.dt_c, x.epsilon, x.wr_iterations, x.accepted, x.voltage, x.current_bv});
    io::CsvTable sm({"order", "error", "max_dt_c_s", "max_growth", "intervals", "rejected", "max_lithium_defect",
                     "wall_s"});
    for (const auto& s : r.summary)
      sm.add({s.order, s.error, s.max_dt_c, s.max_growth, s.intervals, s.rejected, s.max_lithium_defect, s.wall});
    io::CsvTable ref({"t_s", "voltage_V", "current_bv_A_m2"});
    for (std::size_t k = 0; k < r.ref_t.size(); ++k) ref.add({r.ref_t[k], r.ref_voltage[k], r.ref_current_bv[k]});
    out.write("adaptive_intervals.csv", iv);
    out.write("adaptive_summary.csv", sm);
    out.write("adaptive_reference.csv", ref);
    const auto g = studies::adaptive_gates(r, spec.tol);
    summary["adaptive"] = gates_json(g);
    all.insert(all.end(), g.begin(), g.end());
  }
  if (all.empty()) throw ConfigError("study.part must be all, fixed or adaptive for converge-coupling");
  summary["pass"] = studies::all_pass(all);
  return summary;
}

json work_precision(const io::RunConfig& cfg, io::OutputSet& out) {
  const auto r = studies::work_precision(cfg.physics(), cfg.work_precision_spec());
  io::CsvTable t({"case", "order", "tol", "wall_s", "error", "intervals", "rejected"});
  for (const auto& row : r.rows)
    t.add({row.case_name, row.order, row.tol, row.wall, row.error, row.intervals, row.rejected});
  io::CsvTable a({"order", "wall_s_at_target", "extrapolated"});
  for (const auto& x : r.time_at_target) a.add({x.order, x.wall, x.extrapolated});
  out.write("work_precision.csv", t);
  out.write("work_precision_target.csv", a);
  const auto g = studies::work_precision_gates(r);
  return {{"gates", gates_json(g)}, {"pass", studies::all_pass(g)}};
}

json conditioning(const io::RunConfig& cfg, io::OutputSet& out) {
  const auto r = studies::conditioning(cfg.physics(), cfg.conditioning_spec());
  io::CsvTable t({"drive", "matrix", "cells", "dx_nd", "cond", "eig_min", "eig_median", "eig_max"});
  for (const auto& x : r.rows) t.add({x.drive, x.matrix, x.cells, x.dx, x.cond, x.eig_min, x.eig_median, x.eig_max});
  io::CsvTable e({"drive", "matrix", "cells", "index", "magnitude"});
  for (const auto& x : r.eigenvalues) e.add({x.drive, x.matrix, x.cells, x.index, x.magnitude});
  auto f = fit_table();
  for (const auto& [name, fit] : r.fits) add_fit(f, name, "dx", fit);
  out.write("conditioning.csv", t);
  out.write("conditioning_eigenvalues.csv", e);
  out.write("conditioning_fits.csv", f);
  json fits;
  for (const auto& [name, fit] : r.fits) fits[name] = fit_json(fit);
  return {{"fits", fits}};
}

json index_check(const io::RunConfig& cfg, io::OutputSet& out) {
  const auto r = studies::index_check(cfg.physics(), cfg.index_spec());
  io::CsvTable t({"cells", "dx_nd", "t_s", "size", "rank", "sigma_max", "sigma_min", "cond"});
  for (const auto& x : r.rows) t.add({x.cells, x.dx, x.t, x.size, x.rank, x.sigma_max, x.sigma_min, x.cond});
  io::CsvTable n({"row"});
  for (const auto& x : r.non_dominant_rows) n.add({x});
  out.write("index_check.csv", t);
  out.write("index_nondominant.csv", n);
  int full = 0;
  for (const auto& x : r.rows) full += x.rank == x.size;
  return {{"full_rank_states", full},
          {"states", r.rows.size()},
          {"cond_fit", fit_json(r.fit)},
          {"non_dominant_rows", r.non_dominant_rows}};
}

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("CELLKIT_THREADS"); env && *env) {
    try {
      std::size_t pos = 0;
      const int n = std::stoi(env, &pos);
      if (pos == std::string(env).size() && n > 0) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("CELLKIT_THREADS must be a positive integer, got '{}'", env));
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cellkit: 1D lithium half-cell simulator and study harness"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--config", opt.config, "configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", opt.out, "output directory (overrides [output] dir)");
  app.add_option("--threads", opt.threads, "worker threads (fallback: CELLKIT_THREADS)")->check(CLI::PositiveNumber);
  app.add_flag("--verbose,-v", opt.verbose, "progress logging");
  app.add_flag_callback(
      "--schema",
      [] {
        std::cout << io::schema_reference();
        throw CLI::Success();
      },
      "print the configuration schema and exit");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"run", "simulate the configured protocol"},
      {"oracle", "compare a constant-current run with the analytical solution"},
      {"converge-space", "grid refinement against the analytical solution, and integrator order"},
      {"converge-coupling", "fixed-interval coupling order and the adaptive sine study"},
      {"work-precision", "wall time against error over a tolerance sweep"},
      {"conditioning", "step-Jacobian conditioning of the full and split systems"},
      {"index-check", "rank and conditioning of the constraint Jacobian"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {  // --help and --schema
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }
  spdlog::set_level(opt.verbose ? spdlog::level::info : spdlog::level::warn);
  const std::string cmd = app.get_subcommands().front()->get_name();

  std::optional<io::RunConfig> cfg;
  int threads = 1;
  try {
    if (opt.config.empty()) throw ConfigError("--config is required");
    cfg = io::parse_config(opt.config);
    threads = resolve_threads(opt.threads);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  }

  io::OutputSet out(opt.out.empty() ? cfg->output_dir() : opt.out);
  const auto started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  json manifest{{"subcommand", cmd},   {"config", opt.config},  {"config_hash", cfg->hash()},
                {"threads", threads},  {"started_utc", started}};
  int code = kOk;
  try {
    out.write("config_resolved.ini", cfg->echo());
    json summary;
    if (cmd == "run") summary = run(*cfg, out, threads);
    else if (cmd == "oracle") summary = oracle(*cfg, out);
    else if (cmd == "converge-space") summary = converge_space(*cfg, out);
    else if (cmd == "converge-coupling") summary = converge_coupling(*cfg, out);
    else if (cmd == "work-precision") summary = work_precision(*cfg, out);
    else if (cmd == "conditioning") summary = conditioning(*cfg, out);
    else summary = index_check(*cfg, out);
    out.write("summary.json", summary);
    manifest["status"] = "ok";
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    manifest["status"] = "config error";
    manifest["error"] = e.what();
    code = kConfig;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    manifest["status"] = "numerical failure";
    manifest["error"] = e.what();
    code = kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    manifest["status"] = "failure";
    manifest["error"] = e.what();
    code = kNumerical;
  }
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["exit_code"] = code;
  try {
    out.write_manifest(std::move(manifest));
  } catch (const std::exception& e) {
    std::cerr << "cannot write manifest: " << e.what() << "\n";
    if (code == kOk) code = kNumerical;
  }
  return code;
}
