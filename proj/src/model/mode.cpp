#include "cellkit/model/mode.hpp"

#include <cmath>
#include <numbers>

#include "cellkit/errors.hpp"

namespace cellkit::model {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

OperatingMode OperatingMode::constant_current(double c_rate) { return sequence({{0.0, ConstantCurrent{c_rate}}}); }

OperatingMode OperatingMode::constant_voltage(double volts) { return sequence({{0.0, ConstantVoltage{volts}}}); }

OperatingMode OperatingMode::sine_voltage(double mean, double rel_amplitude, double n_oscillations,
                                          double duration) {
  return sequence({{0.0, SineVoltage{mean, rel_amplitude, n_oscillations, duration}}});
}

OperatingMode OperatingMode::cc_then_cv(double c_rate, double t_switch) {
  return sequence({{0.0, ConstantCurrent{c_rate}}, {t_switch, HoldVoltage{}}});
}

OperatingMode OperatingMode::sequence(std::vector<Phase> phases) {
  if (phases.empty()) throw ConfigError("operating mode needs at least one phase");
  for (std::size_t k = 1; k < phases.size(); ++k) {
    if (!(phases[k].t_begin > phases[k - 1].t_begin))
      throw ConfigError("operating mode phase boundaries must be strictly increasing");
  }
  if (std::holds_alternative<HoldVoltage>(phases.front().drive))
    throw ConfigError("a hold-voltage phase needs a preceding phase");
  for (const auto& ph : phases) {
    if (const auto* s = std::get_if<SineVoltage>(&ph.drive)) {
      if (!(s->rel_amplitude >= 0.0 && s->rel_amplitude < 1.0))
        throw ConfigError("sine rel_amplitude must lie in [0,1)");
      if (!(s->duration > 0.0)) throw ConfigError("sine duration must be > 0");
    }
  }
  OperatingMode m;
  m.phases_ = std::move(phases);
  return m;
}

std::size_t OperatingMode::phase_at(double t_seconds) const {
  std::size_t k = 0;
  while (k + 1 < phases_.size() && phases_[k + 1].t_begin <= t_seconds) ++k;
  return k;
}

ExternalCondition resolve(const Drive& drive, double t_seconds, const Model& model, double held_volts) {
  const double phi_scale = model.scales().potential_scale;
  const double i_scale = model.scales().current_s_scale;
  return std::visit(
      overloaded{
          [&](const ConstantCurrent& cc) {
            return ExternalCondition::current(-cc.c_rate * model.reference_current() / i_scale);
          },
          [&](const ConstantVoltage& cv) { return ExternalCondition::potential(cv.applied / phi_scale); },
          [&](const SineVoltage& sv) {
            const double w = 2.0 * std::numbers::pi * sv.n_oscillations / sv.duration;
            const double v = sv.mean * (1.0 + sv.rel_amplitude * std::sin(w * t_seconds));
            return ExternalCondition::potential(v / phi_scale);
          },
          [&](const HoldVoltage&) { return ExternalCondition::potential(held_volts / phi_scale); }},
      drive);
}

bool is_current_drive(const Drive& d) { return std::holds_alternative<ConstantCurrent>(d); }

}  // namespace cellkit::model
