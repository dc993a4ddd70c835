#include "cellkit/io/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <openssl/evp.h>

#include "cellkit/fv/grid.hpp"

namespace cellkit::io {

namespace {

enum class Kind { Real, Int, Bool, Text, RealList, IntList, TextList };

struct Key {
  const char* name;  // section.key
  Kind kind;
  const char* def;   // nullptr: required when `required`, else left to the consumer
  const char* doc;
  bool required = false;
  const char* choices = nullptr;  // '|' separated, Text and TextList only
};

// clang-format off
const std::vector<Key>& schema() {
  static const std::vector<Key> keys{
      {"physics.conc_solid_max", Kind::Real, nullptr, "maximum solid concentration, mol/m^3", true},
      {"physics.conc_solid_init", Kind::Real, "13000", "initial solid concentration, mol/m^3"},
      {"physics.conc_electrolyte_init", Kind::Real, "1000", "initial electrolyte concentration, mol/m^3"},
      {"physics.faraday", Kind::Real, "96487", "C/mol"},
      {"physics.gas_constant", Kind::Real, "8.314", "J/(mol K)"},
      {"physics.temperature", Kind::Real, "298.15", "K"},
      {"physics.len_electrolyte", Kind::Real, "2e-05", "m"},
      {"physics.len_active", Kind::Real, "1e-05", "m"},
      {"physics.len_collector", Kind::Real, "1e-05", "m"},
      {"physics.diff_electrolyte", Kind::Real, "1e-10", "m^2/s"},
      {"physics.diff_active", Kind::Real, "3e-14", "m^2/s"},
      {"physics.cond_ionic", Kind::Real, "1", "S/m"},
      {"physics.cond_active", Kind::Real, "100", "S/m"},
      {"physics.cond_collector", Kind::Real, "3700", "S/m"},
      {"physics.transference", Kind::Real, "0.4", "cation transference number"},
      {"physics.activity_deriv", Kind::Real, "0", "d ln f / d ln c"},
      {"physics.rate_const_scaled", Kind::Real, "8.9e-07", "cathode rate constant"},
      {"physics.exch_current_li", Kind::Real, "10", "anode exchange current density, A/m^2"},
      {"physics.sinh_guard", Kind::Real, "50", "largest admissible kinetic sinh argument"},
      {"physics.ref_current", Kind::Real, nullptr, "1C current density override, A/m^2"},
      {"physics.ocp", Kind::Text, model::OpenCircuitPotential::kDefaultExpression, "U0(x) in volts, x = c_s/c_s,max"},
      {"physics.ocp_x_min", Kind::Real, "0", "lower end of the OCP range"},
      {"physics.ocp_x_max", Kind::Real, "1", "upper end of the OCP range"},
      {"physics.ocp_table_x", Kind::RealList, nullptr, "tabulated OCP stoichiometries (replaces ocp)"},
      {"physics.ocp_table_u", Kind::RealList, nullptr, "tabulated OCP values, V"},

      {"grid.cells", Kind::Int, "200", "total cells, split in proportion to the material lengths"},

      {"solver.scheme", Kind::Text, "radau_iia3", "time integrator", false, "radau_iia3|implicit_euler"},
      {"solver.rtol", Kind::Real, "1e-08", "relative tolerance"},
      {"solver.atol", Kind::Real, nullptr, "absolute tolerance (default rtol/100)"},
      {"solver.fixed_dt", Kind::Real, "0", "fixed step in s; 0 selects error control"},

      {"mode.kind", Kind::Text, "cc", "operating protocol", false, "cc|cv|sine|cc_then_cv"},
      {"mode.c_rate", Kind::Real, "1", "C-rate of constant-current phases"},
      {"mode.voltage", Kind::Real, nullptr, "held voltage of kind = cv, V"},
      {"mode.mean", Kind::Real, nullptr, "sine mean, V (default: OCP at the initial stoichiometry)"},
      {"mode.rel_amplitude", Kind::Real, "0.05", "sine amplitude relative to the mean"},
      {"mode.n_oscillations", Kind::Real, "3", "sine periods over duration"},
      {"mode.duration", Kind::Real, "500", "sine duration, s"},
      {"mode.t_switch", Kind::Real, "11", "CC to CV switch time of kind = cc_then_cv, s"},
      {"mode.t_end", Kind::Real, "500", "end of the run, s"},
      {"mode.samples", Kind::Int, "100", "uniform output samples (0: accepted steps only)"},

      {"coupling.enabled", Kind::Bool, "false", "multi-domain coupling for the run"},
      {"coupling.start", Kind::Real, "0", "start of the coupled window, s"},
      {"coupling.mode", Kind::Text, "implicit", "coupling scheme", false, "explicit|implicit"},
      {"coupling.order", Kind::Int, "2", "coupling order p (predictor degrees p-1 and p)"},
      {"coupling.tol", Kind::Real, "1e-06", "estimator tolerance"},
      {"coupling.wr_tol", Kind::Real, "1e-10", "waveform relaxation tolerance"},
      {"coupling.max_wr_iterations", Kind::Int, "50", "waveform relaxation sweep limit"},
      {"coupling.dt_c_init", Kind::Real, "0.01", "first coupling interval, s"},
      {"coupling.dt_c_min", Kind::Real, "1e-09", "smallest coupling interval, s"},
      {"coupling.dt_c_max", Kind::Real, "1e+300", "largest coupling interval, s"},
      {"coupling.reject_cap", Kind::Real, "0.9", "a rejected interval is retried at most this fraction of its length"},
      {"coupling.adaptive", Kind::Bool, "true", "adaptive intervals (false: fixed)"},
      {"coupling.intervals", Kind::Int, "64", "number of fixed intervals"},
      {"coupling.sub_rtol", Kind::Real, nullptr, "sub-problem rtol (default tol/10)"},
      {"coupling.sub_atol", Kind::Real, nullptr, "sub-problem atol (default sub_rtol/100)"},

      {"study.part", Kind::Text, "all", "part of a combined study", false, "all|space|temporal|fixed|adaptive"},
      {"study.cells", Kind::Int, nullptr, "grid of single-grid studies"},
      {"study.grids", Kind::IntList, nullptr, "grid sweep"},
      {"study.times", Kind::RealList, nullptr, "evaluation times, s"},
      {"study.c_rate", Kind::Real, nullptr, "C-rate"},
      {"study.rtol", Kind::Real, nullptr, "monolithic tolerance"},
      {"study.ref_rtol", Kind::Real, nullptr, "quasi-exact reference tolerance"},
      {"study.t_ini", Kind::Real, nullptr, "start of the CV window (end of the CC pre-phase), s"},
      {"study.t_end", Kind::Real, nullptr, "end of the study window, s"},
      {"study.voltage_samples", Kind::Int, nullptr, "voltage samples of the oracle check"},
      {"study.intervals", Kind::IntList, nullptr, "fixed-interval sweep N_t"},
      {"study.orders", Kind::IntList, nullptr, "coupling orders"},
      {"study.modes", Kind::TextList, nullptr, "coupling schemes", false, "explicit|implicit"},
      {"study.wr_tol", Kind::Real, nullptr, "waveform relaxation tolerance"},
      {"study.sub_rtol", Kind::Real, nullptr, "sub-problem tolerance of fixed-interval sweeps"},
      {"study.cc_control", Kind::Bool, nullptr, "constant-current control sweep"},
      {"study.tol", Kind::Real, nullptr, "estimator tolerance of the adaptive sine study"},
      {"study.dt_c_init", Kind::Real, nullptr, "first coupling interval, s"},
      {"study.rel_amplitude", Kind::Real, nullptr, "sine amplitude relative to the mean"},
      {"study.n_oscillations", Kind::Real, nullptr, "sine periods"},
      {"study.duration", Kind::Real, nullptr, "sine duration, s"},
      {"study.tols", Kind::RealList, nullptr, "work-precision tolerance sweep"},
      {"study.case", Kind::Text, nullptr, "work-precision case", false, "cv|sine"},
      {"study.target", Kind::Real, nullptr, "work-precision target error"},
      {"study.repetitions", Kind::Int, nullptr, "timing repetitions (median)"},
      {"study.time_cap", Kind::Real, nullptr, "per-run wall-time cap, s"},
      {"study.t_eval", Kind::Real, nullptr, "conditioning evaluation time, s"},
      {"study.cv_volts", Kind::Real, nullptr, "conditioning CV voltage (negative: hold after 11 s CC)"},
      {"study.dt", Kind::Real, nullptr, "dimensionless step of the step Jacobians"},
      {"study.schemes", Kind::TextList, nullptr, "integrators of the temporal sweep", false, "radau_iia3|implicit_euler"},
      {"study.radau_steps", Kind::IntList, nullptr, "Radau IIA step counts"},
      {"study.euler_steps", Kind::IntList, nullptr, "implicit Euler step counts"},

      {"output.dir", Kind::Text, "out", "output directory"},
  };
  return keys;
}
// clang-format on

const Key* find_key(const std::string& name) {
  for (const auto& k : schema())
    if (name == k.name) return &k;
  return nullptr;
}

bool parse_real(const std::string& s, double& out) {
  const auto* b = s.data();
  const auto* e = b + s.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e;
}

bool parse_int(const std::string& s, long& out) {
  const auto* b = s.data();
  const auto* e = b + s.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(","));
  for (auto& p : parts) boost::trim(p);
  if (parts.size() == 1 && parts[0].empty()) parts.clear();
  return parts;
}

bool in_choices(const Key& k, const std::string& v) {
  if (!k.choices) return true;
  std::vector<std::string> c;
  boost::split(c, std::string(k.choices), boost::is_any_of("|"));
  return std::find(c.begin(), c.end(), v) != c.end();
}

// Converts raw text; returns an error description or an empty string.
std::string convert(const Key& k, const std::string& raw, Value& out) {
  const std::string text = boost::trim_copy(raw);
  switch (k.kind) {
    case Kind::Real: {
      double v;
      if (!parse_real(text, v)) return fmt::format("expected a number, got '{}'", text);
      out = v;
      return {};
    }
    case Kind::Int: {
      long v;
      if (!parse_int(text, v)) return fmt::format("expected an integer, got '{}'", text);
      out = v;
      return {};
    }
    case Kind::Bool: {
      const auto t = boost::to_lower_copy(text);
      if (t == "true" || t == "yes" || t == "on" || t == "1") out = true;
      else if (t == "false" || t == "no" || t == "off" || t == "0") out = false;
      else return fmt::format("expected true or false, got '{}'", text);
      return {};
    }
    case Kind::Text:
      if (!in_choices(k, text)) return fmt::format("'{}' is not one of {}", text, k.choices);
      out = text;
      return {};
    case Kind::RealList: {
      std::vector<double> v;
      for (const auto& p : split_list(text)) {
        double x;
        if (!parse_real(p, x)) return fmt::format("expected a list of numbers, got '{}'", text);
        v.push_back(x);
      }
      out = std::move(v);
      return {};
    }
    case Kind::IntList: {
      std::vector<long> v;
      for (const auto& p : split_list(text)) {
        long x;
        if (!parse_int(p, x)) return fmt::format("expected a list of integers, got '{}'", text);
        v.push_back(x);
      }
      out = std::move(v);
      return {};
    }
    case Kind::TextList: {
      auto v = split_list(text);
      for (const auto& p : v)
        if (!in_choices(k, p)) return fmt::format("'{}' is not one of {}", p, k.choices);
      out = std::move(v);
      return {};
    }
  }
  return "unhandled kind";
}

std::string format_value(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::string>) return x;
        else if constexpr (std::is_same_v<T, double> || std::is_same_v<T, long>) return fmt::format("{}", x);
        else return fmt::format("{}", fmt::join(x, ", "));
      },
      v);
}

// Line of each "section.key" in the text, for diagnostics.
std::map<std::string, int> key_lines(const std::string& text) {
  std::map<std::string, int> out;
  std::istringstream in(text);
  std::string line, section;
  for (int n = 1; std::getline(in, line); ++n) {
    boost::trim(line);
    if (line.empty() || line[0] == ';' || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = boost::trim_copy(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out.emplace(section + "." + boost::trim_copy(line.substr(0, eq)), n);
  }
  return out;
}

template <class T>
std::vector<T> to_vector(const std::vector<long>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

SchemaError::SchemaError(std::vector<std::string> violations)
    : ConfigError("invalid configuration:\n  " + boost::join(violations, "\n  ")), violations_(std::move(violations)) {}

template <class T>
T RunConfig::get(const std::string& key) const {
  const Key* k = find_key(key);
  if (!k) throw ConfigError("unknown configuration key " + key);
  Value v;
  if (auto it = values_.find(key); it != values_.end()) {
    v = it->second;
  } else {
    if (!k->def) throw ConfigError("configuration key " + key + " has no value");
    convert(*k, k->def, v);
  }
  if constexpr (std::is_same_v<T, int>) {
    return static_cast<int>(std::get<long>(v));
  } else if constexpr (std::is_same_v<T, std::vector<int>>) {
    return to_vector<int>(std::get<std::vector<long>>(v));
  } else {
    return std::get<T>(v);
  }
}

template double RunConfig::get<double>(const std::string&) const;
template long RunConfig::get<long>(const std::string&) const;
template int RunConfig::get<int>(const std::string&) const;
template bool RunConfig::get<bool>(const std::string&) const;
template std::string RunConfig::get<std::string>(const std::string&) const;
template std::vector<double> RunConfig::get<std::vector<double>>(const std::string&) const;
template std::vector<int> RunConfig::get<std::vector<int>>(const std::string&) const;
template std::vector<std::string> RunConfig::get<std::vector<std::string>>(const std::string&) const;

std::string RunConfig::hash() const {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(source_.data(), source_.size(), md, &len, EVP_sha256(), nullptr);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string RunConfig::echo() const {
  std::string out, section;
  for (const auto& k : schema()) {
    const std::string name = k.name;
    const auto dot = name.find('.');
    const auto sec = name.substr(0, dot), key = name.substr(dot + 1);
    if (sec != section) {
      out += fmt::format("{}[{}]\n", section.empty() ? "" : "\n", sec);
      section = sec;
    }
    if (auto it = values_.find(name); it != values_.end()) {
      out += fmt::format("; {}\n{} = {}\n", k.doc, key, format_value(it->second));
    } else if (k.def) {
      Value v;
      convert(k, k.def, v);
      out += fmt::format("; {} (default)\n{} = {}\n", k.doc, key, format_value(v));
    } else {
      out += fmt::format("; {} (built-in default)\n; {} =\n", k.doc, key);
    }
  }
  return out;
}

model::PhysicalParameters RunConfig::physics() const {
  model::PhysicalParameters p;
  p.conc_solid_max = get<double>("physics.conc_solid_max");
  p.conc_solid_init = get<double>("physics.conc_solid_init");
  p.conc_electrolyte_init = get<double>("physics.conc_electrolyte_init");
  p.faraday = get<double>("physics.faraday");
  p.gas_constant = get<double>("physics.gas_constant");
  p.temperature = get<double>("physics.temperature");
  p.len_electrolyte = get<double>("physics.len_electrolyte");
  p.len_active = get<double>("physics.len_active");
  p.len_collector = get<double>("physics.len_collector");
  p.diff_electrolyte = get<double>("physics.diff_electrolyte");
  p.diff_active = get<double>("physics.diff_active");
  p.cond_ionic = get<double>("physics.cond_ionic");
  p.cond_active = get<double>("physics.cond_active");
  p.cond_collector = get<double>("physics.cond_collector");
  p.transference = get<double>("physics.transference");
  p.activity_deriv = get<double>("physics.activity_deriv");
  p.rate_const_scaled = get<double>("physics.rate_const_scaled");
  p.exch_current_li = get<double>("physics.exch_current_li");
  p.sinh_guard = get<double>("physics.sinh_guard");
  if (has("physics.ref_current")) p.ref_current_override = get<double>("physics.ref_current");
  if (has("physics.ocp_table_x") || has("physics.ocp_table_u")) {
    p.ocp = model::OpenCircuitPotential::from_table(get<std::vector<double>>("physics.ocp_table_x"),
                                                    get<std::vector<double>>("physics.ocp_table_u"));
  } else {
    p.ocp = model::OpenCircuitPotential::from_expression(
        get<std::string>("physics.ocp"), get<double>("physics.ocp_x_min"), get<double>("physics.ocp_x_max"));
  }
  return p;
}

int RunConfig::cells() const { return get<int>("grid.cells"); }

sim::MonolithicOptions RunConfig::solver() const {
  sim::MonolithicOptions o;
  o.scheme = get<std::string>("solver.scheme");
  o.rtol = get<double>("solver.rtol");
  if (has("solver.atol")) o.atol = get<double>("solver.atol");
  o.fixed_dt = get<double>("solver.fixed_dt");
  return o;
}

model::OperatingMode RunConfig::operating_mode() const {
  const auto kind = get<std::string>("mode.kind");
  const double c_rate = get<double>("mode.c_rate");
  if (kind == "cc") return model::OperatingMode::constant_current(c_rate);
  if (kind == "cv") return model::OperatingMode::constant_voltage(get<double>("mode.voltage"));
  if (kind == "cc_then_cv") return model::OperatingMode::cc_then_cv(c_rate, get<double>("mode.t_switch"));
  double mean;
  if (has("mode.mean")) {
    mean = get<double>("mode.mean");
  } else {
    const auto p = physics();
    mean = p.ocp(p.conc_solid_init / p.conc_solid_max);
  }
  return model::OperatingMode::sine_voltage(mean, get<double>("mode.rel_amplitude"),
                                            get<double>("mode.n_oscillations"), get<double>("mode.duration"));
}

double RunConfig::t_end() const { return get<double>("mode.t_end"); }
bool RunConfig::coupled() const { return get<bool>("coupling.enabled"); }
double RunConfig::coupled_from() const { return get<double>("coupling.start"); }

coupling::CouplingConfig RunConfig::coupling(double time_scale) const {
  coupling::CouplingConfig c;
  c.mode = coupling::mode_from_string(get<std::string>("coupling.mode"));
  c.order = get<int>("coupling.order");
  c.tol = get<double>("coupling.tol");
  c.wr_tol = get<double>("coupling.wr_tol");
  c.max_wr_iterations = get<int>("coupling.max_wr_iterations");
  c.dt_c_init = get<double>("coupling.dt_c_init") / time_scale;
  c.dt_c_min = get<double>("coupling.dt_c_min") / time_scale;
  c.dt_c_max = get<double>("coupling.dt_c_max") / time_scale;
  c.reject_cap = get<double>("coupling.reject_cap");
  c.adaptive = get<bool>("coupling.adaptive");
  c.fixed_intervals = get<int>("coupling.intervals");
  if (has("coupling.sub_rtol")) c.sub_rtol = get<double>("coupling.sub_rtol");
  if (has("coupling.sub_atol")) c.sub_atol = get<double>("coupling.sub_atol");
  return c;
}

std::string RunConfig::output_dir() const { return get<std::string>("output.dir"); }

namespace {

template <class T>
void apply(const RunConfig& c, const char* key, T& field) {
  if (c.has(key)) field = c.get<T>(key);
}

std::vector<coupling::CouplingMode> modes_of(const std::vector<std::string>& names) {
  std::vector<coupling::CouplingMode> out;
  for (const auto& n : names) out.push_back(coupling::mode_from_string(n));
  return out;
}

}  // namespace

studies::OracleCheckSpec RunConfig::oracle_spec() const {
  studies::OracleCheckSpec s;
  apply(*this, "study.cells", s.cells);
  apply(*this, "study.t_end", s.t_end);
  apply(*this, "study.c_rate", s.c_rate);
  apply(*this, "study.rtol", s.rtol);
  apply(*this, "study.voltage_samples", s.voltage_samples);
  return s;
}

studies::SpaceConvergenceSpec RunConfig::space_spec() const {
  studies::SpaceConvergenceSpec s;
  apply(*this, "study.grids", s.grids);
  apply(*this, "study.times", s.times);
  apply(*this, "study.c_rate", s.c_rate);
  apply(*this, "study.rtol", s.rtol);
  return s;
}

studies::TemporalOrderSpec RunConfig::temporal_spec() const {
  studies::TemporalOrderSpec s;
  apply(*this, "study.cells", s.cells);
  apply(*this, "study.schemes", s.schemes);
  apply(*this, "study.radau_steps", s.radau_steps);
  apply(*this, "study.euler_steps", s.euler_steps);
  apply(*this, "study.rel_amplitude", s.rel_amplitude);
  apply(*this, "study.ref_rtol", s.ref_rtol);
  return s;
}

studies::CouplingConvergenceSpec RunConfig::coupling_spec() const {
  studies::CouplingConvergenceSpec s;
  apply(*this, "study.cells", s.window.cells);
  apply(*this, "study.c_rate", s.window.c_rate);
  apply(*this, "study.t_ini", s.window.t_ini);
  apply(*this, "study.t_end", s.window.t_end);
  apply(*this, "study.ref_rtol", s.window.ref_rtol);
  apply(*this, "study.intervals", s.intervals);
  apply(*this, "study.orders", s.orders);
  if (has("study.modes")) s.modes = modes_of(get<std::vector<std::string>>("study.modes"));
  apply(*this, "study.wr_tol", s.wr_tol);
  apply(*this, "study.sub_rtol", s.sub_rtol);
  apply(*this, "study.cc_control", s.cc_control);
  return s;
}

studies::AdaptiveSpec RunConfig::adaptive_spec() const {
  studies::AdaptiveSpec s;
  apply(*this, "study.cells", s.window.cells);
  apply(*this, "study.rel_amplitude", s.window.rel_amplitude);
  apply(*this, "study.n_oscillations", s.window.n_oscillations);
  apply(*this, "study.duration", s.window.duration);
  apply(*this, "study.ref_rtol", s.window.ref_rtol);
  apply(*this, "study.orders", s.orders);
  if (has("study.modes")) {
    const auto m = modes_of(get<std::vector<std::string>>("study.modes"));
    if (!m.empty()) s.mode = m.back();
  }
  apply(*this, "study.tol", s.tol);
  apply(*this, "study.dt_c_init", s.dt_c_init);
  apply(*this, "study.wr_tol", s.wr_tol);
  return s;
}

studies::WorkPrecisionSpec RunConfig::work_precision_spec() const {
  studies::WorkPrecisionSpec s;
  apply(*this, "study.case", s.case_name);
  apply(*this, "study.cells", s.cv.cells);
  apply(*this, "study.cells", s.sine.cells);
  apply(*this, "study.c_rate", s.cv.c_rate);
  apply(*this, "study.t_ini", s.cv.t_ini);
  apply(*this, "study.t_end", s.cv.t_end);
  apply(*this, "study.ref_rtol", s.cv.ref_rtol);
  apply(*this, "study.ref_rtol", s.sine.ref_rtol);
  apply(*this, "study.rel_amplitude", s.sine.rel_amplitude);
  apply(*this, "study.n_oscillations", s.sine.n_oscillations);
  apply(*this, "study.duration", s.sine.duration);
  apply(*this, "study.tols", s.tols);
  apply(*this, "study.orders", s.orders);
  if (has("study.modes")) {
    const auto m = modes_of(get<std::vector<std::string>>("study.modes"));
    if (!m.empty()) s.mode = m.back();
  }
  apply(*this, "study.dt_c_init", s.dt_c_init);
  apply(*this, "study.repetitions", s.repetitions);
  apply(*this, "study.target", s.target);
  apply(*this, "study.time_cap", s.time_cap);
  return s;
}

studies::ConditioningSpec RunConfig::conditioning_spec() const {
  studies::ConditioningSpec s;
  apply(*this, "study.grids", s.grids);
  apply(*this, "study.t_eval", s.t_eval);
  apply(*this, "study.c_rate", s.c_rate);
  apply(*this, "study.cv_volts", s.cv_volts);
  apply(*this, "study.dt", s.dt);
  return s;
}

studies::IndexCheckSpec RunConfig::index_spec() const {
  studies::IndexCheckSpec s;
  apply(*this, "study.grids", s.grids);
  apply(*this, "study.times", s.times);
  apply(*this, "study.c_rate", s.c_rate);
  return s;
}

RunConfig parse_config_text(const std::string& text, const std::string& name) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(fmt::format("{}:{}: {}", name, e.line(), e.message()), static_cast<int>(e.line()));
  }

  const auto lines = key_lines(text);
  auto where = [&](const std::string& key) {
    auto it = lines.find(key);
    return it == lines.end() ? std::string() : fmt::format(" (line {})", it->second);
  };

  RunConfig cfg;
  cfg.source_ = text;
  std::vector<std::string> bad;
  static const std::vector<std::string> sections{"physics", "grid", "solver", "coupling", "mode", "study", "output"};
  for (const auto& [sec, body] : tree) {
    if (body.empty()) {
      bad.push_back(fmt::format("key '{}' outside any section{}", sec, where("." + sec)));
      continue;
    }
    if (std::find(sections.begin(), sections.end(), sec) == sections.end()) {
      bad.push_back(fmt::format("unknown section [{}]", sec));
      continue;
    }
    for (const auto& [key, node] : body) {
      const std::string full = sec + "." + key;
      const Key* k = find_key(full);
      if (!k) {
        bad.push_back(fmt::format("unknown key '{}' in [{}]{}", key, sec, where(full)));
        continue;
      }
      Value v;
      if (auto err = convert(*k, node.data(), v); !err.empty()) {
        bad.push_back(fmt::format("{}: {}{}", full, err, where(full)));
        continue;
      }
      cfg.values_[full] = std::move(v);
    }
  }
  for (const auto& k : schema())
    if (k.required && !cfg.has(k.name)) bad.push_back(fmt::format("{} is required (no default)", k.name));
  if (!bad.empty()) throw SchemaError(std::move(bad));

  // Cross-section checks, all collected.
  auto check = [&](auto&& f) {
    try {
      f();
    } catch (const SchemaError& e) {
      bad.insert(bad.end(), e.violations().begin(), e.violations().end());
    } catch (const Error& e) {
      bad.emplace_back(e.what());
    }
  };
  std::optional<model::PhysicalParameters> phys;
  check([&] {
    auto p = cfg.physics();
    p.validate();
    phys = std::move(p);
  });
  if (cfg.has("physics.ocp_table_x") != cfg.has("physics.ocp_table_u"))
    bad.emplace_back("physics.ocp_table_x and physics.ocp_table_u must be given together");
  if (phys) {
    check([&] {
      const model::Model m(*phys);
      fv::Grid::from_total(m, cfg.cells());
      cfg.coupling(m.scales().time_scale).validate();
    });
  }
  if (!(cfg.get<double>("solver.rtol") > 0.0)) bad.emplace_back("solver.rtol must be > 0");
  if (cfg.get<double>("solver.fixed_dt") < 0.0) bad.emplace_back("solver.fixed_dt must be >= 0");
  if (cfg.get<std::string>("mode.kind") == "cv" && !cfg.has("mode.voltage"))
    bad.emplace_back("mode.voltage is required when mode.kind = cv");
  if (!(cfg.t_end() > 0.0)) bad.emplace_back("mode.t_end must be > 0");
  if (cfg.get<int>("mode.samples") < 0) bad.emplace_back("mode.samples must be >= 0");
  if (cfg.coupled() && !(cfg.coupled_from() >= 0.0 && cfg.coupled_from() < cfg.t_end()))
    bad.emplace_back("coupling.start must lie in [0, mode.t_end)");
  if (!bad.empty()) throw SchemaError(std::move(bad));
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read configuration file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

RunConfig default_config(double conc_solid_max) {
  return parse_config_text(fmt::format("[physics]\nconc_solid_max = {}\n", conc_solid_max));
}

std::string schema_reference() {
  std::string out;
  for (const auto& k : schema()) {
    out += fmt::format("{:<28} {}{}{}\n", k.name, k.doc, k.required ? " [required]" : "",
                       k.def ? fmt::format(" [default {}]", k.def) : std::string());
  }
  return out;
}

}  // namespace cellkit::io
