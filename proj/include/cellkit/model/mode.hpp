#pragma once

#include <variant>
#include <vector>

#include "cellkit/model/params.hpp"

namespace cellkit::model {

struct ConstantCurrent {
  double c_rate;
};

struct ConstantVoltage {
  double applied;  // V
};

struct SineVoltage {
  double mean;  // V
  double rel_amplitude;
  double n_oscillations;
  double duration;  // s
};

/// Holds whatever cell voltage the previous phase ended with.
struct HoldVoltage {};

using Drive = std::variant<ConstantCurrent, ConstantVoltage, SineVoltage, HoldVoltage>;

struct Phase {
  double t_begin;  // s
  Drive drive;
};

/// Condition imposed at the current collector end, dimensionless.
struct ExternalCondition {
  enum class Kind { Current, Potential };
  Kind kind = Kind::Current;
  double value = 0.0;

  static ExternalCondition current(double v) { return {Kind::Current, v}; }
  static ExternalCondition potential(double v) { return {Kind::Potential, v}; }
};

class OperatingMode {
 public:
  static OperatingMode constant_current(double c_rate);
  static OperatingMode constant_voltage(double volts);
  static OperatingMode sine_voltage(double mean, double rel_amplitude, double n_oscillations, double duration);
  static OperatingMode cc_then_cv(double c_rate, double t_switch);
  static OperatingMode sequence(std::vector<Phase> phases);

  const std::vector<Phase>& phases() const { return phases_; }
  std::size_t phase_at(double t_seconds) const;

 private:
  std::vector<Phase> phases_;
};

/// Dimensionless collector condition for `drive` at dimensional time `t`.
/// `held` supplies the voltage for HoldVoltage phases.
ExternalCondition resolve(const Drive& drive, double t_seconds, const Model& model, double held_volts = 0.0);

bool is_current_drive(const Drive& d);

}  // namespace cellkit::model
