#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cellkit/coupling/coupled.hpp"
#include "cellkit/errors.hpp"
#include "cellkit/model/mode.hpp"
#include "cellkit/model/params.hpp"
#include "cellkit/sim/simulate.hpp"
#include "cellkit/studies/studies.hpp"

namespace cellkit::io {

/// Malformed file (syntax); the message carries the line number.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& msg, int line) : ConfigError(msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Well-formed file that violates the schema.  Lists every violation.
class SchemaError : public ConfigError {
 public:
  explicit SchemaError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

using Value = std::variant<double, long, bool, std::string, std::vector<double>, std::vector<long>,
                           std::vector<std::string>>;

/// Sectioned key = value configuration with every key typed by a fixed schema.
///
///   [physics] [grid] [solver] [coupling] [mode] [study] [output]
///
/// Lists are comma separated.  Lines starting with ';' or '#' are comments.
class RunConfig {
 public:
  /// Resolved value of "section.key": the file value or the schema default.
  /// Throws ConfigError for keys without a default that were not given.
  template <class T>
  T get(const std::string& key) const;

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  /// Text that hashed to `hash()`: the file as read.
  const std::string& source() const { return source_; }
  /// Hex SHA-256 of the file text.
  std::string hash() const;
  /// Every schema key with its resolved value, in schema order, as a
  /// config file.  Keys left to a study's built-in default are commented.
  std::string echo() const;

  // Typed views.
  model::PhysicalParameters physics() const;
  int cells() const;
  sim::MonolithicOptions solver() const;
  /// The operating protocol of a `run`.
  model::OperatingMode operating_mode() const;
  double t_end() const;
  bool coupled() const;
  double coupled_from() const;
  coupling::CouplingConfig coupling(double time_scale) const;
  std::string output_dir() const;

  studies::OracleCheckSpec oracle_spec() const;
  studies::SpaceConvergenceSpec space_spec() const;
  studies::TemporalOrderSpec temporal_spec() const;
  studies::CouplingConvergenceSpec coupling_spec() const;
  studies::AdaptiveSpec adaptive_spec() const;
  studies::WorkPrecisionSpec work_precision_spec() const;
  studies::ConditioningSpec conditioning_spec() const;
  studies::IndexCheckSpec index_spec() const;

 private:
  friend RunConfig parse_config_text(const std::string&, const std::string&);
  std::map<std::string, Value> values_;
  std::string source_;
};

RunConfig parse_config_text(const std::string& text, const std::string& name = "<config>");
RunConfig parse_config(const std::string& path);

/// Configuration with only the required keys set, for callers that build
/// runs programmatically.
RunConfig default_config(double conc_solid_max);

/// Documented schema, one line per key.
std::string schema_reference();

}  // namespace cellkit::io
