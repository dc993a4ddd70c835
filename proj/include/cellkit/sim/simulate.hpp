#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cellkit/coupling/coupled.hpp"
#include "cellkit/fv/systems.hpp"

namespace cellkit::sim {

using dae::Vec;

/// Collector condition of one phase as a function of dimensionless time.
fv::BoundaryProvider phase_boundary(const model::Model& m, const model::Drive& drive, double held_volts);

/// Consistent state at t = 0 for the first phase of `mode`.
Vec initial_state(const fv::Discretization& disc, const model::OperatingMode& mode);

struct MonolithicOptions {
  std::string scheme = "radau_iia3";
  double rtol = 1e-8;
  double atol = -1.0;  // negative: rtol / 100
  double fixed_dt = 0.0;  // s; positive disables error control
  /// Output times in seconds.
  std::vector<double> sample_times;
  bool store_steps = true;
};

struct SimulationResult {
  /// Dimensionless times throughout.
  dae::Trajectory steps;
  dae::Trajectory samples;
  Vec y_end;
  dae::IntegrationStats stats;
  /// Collector voltage (V) at every stored step.
  std::vector<double> step_voltage;
  /// Anode flux integral over each step (one entry fewer than steps).
  std::vector<double> step_flux;
  /// Voltage at the last phase switch, used by hold phases.
  double held_volts = 0.0;
};

/// Monolithic run of `mode` over [t0_s, t_end_s] starting from y0 (or the
/// consistent rest state).  Every phase switch re-projects the algebraic part.
SimulationResult simulate(const fv::Discretization& disc, const model::OperatingMode& mode, double t_end_s,
                          const MonolithicOptions& opts, const std::optional<Vec>& y0 = std::nullopt,
                          double t0_s = 0.0, double held_volts = 0.0);

struct CoupledSimulationResult {
  SimulationResult pre;  // monolithic part before the coupled window
  coupling::CoupledResult coupled;
  /// Condition in force at the end of the run.
  model::ExternalCondition final_bc;
};

/// Runs monolithically up to coupled_from_s, then multi-domain to t_end_s.
/// The coupled window must lie inside one phase.
CoupledSimulationResult simulate_coupled(const fv::Discretization& disc, const model::OperatingMode& mode,
                                         double coupled_from_s, double t_end_s, const coupling::CouplingConfig& cfg,
                                         const MonolithicOptions& pre_opts);

/// Voltage (V) of state y under condition bc.
double voltage(const fv::Discretization& disc, const Vec& y, const model::ExternalCondition& bc);

}  // namespace cellkit::sim
