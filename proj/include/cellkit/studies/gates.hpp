#pragma once

#include <string>
#include <vector>

#include "cellkit/studies/studies.hpp"

namespace cellkit::studies {

/// One pass/fail check with a human-readable account of the numbers.
struct Gate {
  std::string name;
  bool pass;
  std::string detail;
};

bool all_pass(const std::vector<Gate>& gates);

/// Largest RMS residual (log10 units) a slope fit may have to count.
inline constexpr double kMaxFitResidual = 0.1;

std::vector<Gate> space_gates(const SpaceConvergenceResult& r);
std::vector<Gate> oracle_gates(const OracleCheckResult& r);
std::vector<Gate> coupling_gates(const CouplingConvergenceResult& r);
std::vector<Gate> temporal_gates(const TemporalOrderResult& r);
std::vector<Gate> adaptive_gates(const AdaptiveResult& r, double tol);
std::vector<Gate> work_precision_gates(const WorkPrecisionResult& r);
std::vector<Gate> conditioning_gates(const ConditioningResult& c, const IndexCheckResult& i);

struct InvariantSpec {
  int cells = 40;
  double c_rate = 1.0;
  double t_end = 500.0;         // s, monolithic balance run
  double coupled_t_end = 50.0;  // s
  /// Coupling tolerance; also the relative agreement demanded of the
  /// constant-current multi-domain run.
  double coupled_tol = 1e-7;
  double jacobian_tol = 1e-6;
};

/// Structural checks: analytic against differenced Jacobian, lithium balance
/// per step, kinetic symmetry, predictor exactness, the oracle's midpoint
/// value and multi-domain against monolithic under constant current.
std::vector<Gate> invariant_gates(const model::PhysicalParameters& p, const InvariantSpec& spec = {});

/// Wall-clock budget check.
Gate runtime_gate(const std::string& name, double seconds, double budget);

}  // namespace cellkit::studies
