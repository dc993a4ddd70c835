#pragma once

#include <string>
#include <vector>

#include "cellkit/coupling/predictor.hpp"
#include "cellkit/dae/integrator.hpp"
#include "cellkit/fv/systems.hpp"

namespace cellkit::coupling {

using dae::Vec;

enum class CouplingMode { Explicit, Implicit };

CouplingMode mode_from_string(const std::string& s);
const char* to_string(CouplingMode m);

struct CouplingConfig {
  CouplingMode mode = CouplingMode::Implicit;
  /// Coupling order p in [1, 4]: the estimator compares predictor degrees p-1
  /// and p; fixed-interval runs use degree p-1.
  int order = 1;
  double tol = 1e-6;
  double wr_tol = 1e-10;
  int max_wr_iterations = 50;
  double dt_c_init = 1e-3;  // dimensionless
  double dt_c_min = 1e-10;
  double dt_c_max = 1e300;
  double growth_cap = 2.0;
  /// A rejected interval is retried at most this fraction of its length.  The
  /// estimate often grows slower than dt^p, so the bare law would creep up on
  /// tol from above one rejection at a time.
  double reject_cap = 0.9;
  bool adaptive = true;
  /// Fixed-interval mode: number of coupling intervals over the run.
  int fixed_intervals = 0;
  /// Fixed-interval mode: obtain the first p-1 history samples from a
  /// monolithic integration so every interval runs at full degree.
  bool monolithic_start = true;
  /// Sub-problem integrator tolerances; non-positive values mean tol / 10.
  double sub_rtol = -1.0;
  double sub_atol = -1.0;
  /// 2 runs the two sub-problems concurrently.
  int threads = 1;

  void validate() const;
  double effective_sub_rtol() const;
  double effective_sub_atol() const;
};

struct CouplingStepReport {
  double t = 0.0;       // interval start
  double dt = 0.0;      // interval length
  double dt_next = 0.0;
  double epsilon = 0.0;
  int degree = 0;       // degree of the accepted cycle
  int wr_iterations = 0;
  bool accepted = true;
  bool wr_converged = true;
  long newton_iterations = 0;
  /// Lithium created over the interval, relative to the inventory (accepted only).
  double lithium_defect = 0.0;
};

struct CoupledStats {
  long intervals = 0;
  long rejected = 0;
  long wr_iterations = 0;
  /// Accepted intervals whose relaxation stopped at max_wr_iterations.
  long wr_unconverged = 0;
  long newton_iterations = 0;
  long sub_steps = 0;
  double max_dt = 0.0;
  double max_lithium_defect = 0.0;
};

struct CoupledResult {
  Vec y_end;
  dae::Trajectory sync;  // merged state at every accepted synchronization
  std::vector<CouplingStepReport> reports;
  CoupledStats stats;
};

/// Synchronizes a merged state: with every concentration held fixed, solves the
/// full algebraic block (cell potentials, boundary and interface unknowns) and
/// writes the result into y.  Throws SingularMatrix when the 4x4 interface
/// Jacobian degenerates.
CouplingValues sync_solve(const fv::Discretization& disc, Vec& y, const model::ExternalCondition& bc,
                          double tol = 1e-13);

/// Determinant of the Jacobian of the four interface rows with respect to the
/// interface unknowns.
double interface_determinant(const fv::Discretization& disc, const Vec& y);

CouplingValues coupling_values(const fv::Discretization& disc, const Vec& y);

struct StepDecision {
  double dt_next;
  bool accept;
};
/// dt * (tol / eps)^(1/p) clamped to [dt_min, min(dt_max, cap * dt)];
/// on rejection additionally capped at reject_cap * dt.
StepDecision adapt_dt(double dt, double epsilon, double tol, int p, const CouplingConfig& cfg);

class CoupledSolver {
 public:
  CoupledSolver(const fv::Discretization& disc, fv::BoundaryProvider bc, CouplingConfig cfg);

  /// y0 must be consistent (e.g. from consistent_init).
  CoupledResult run(const Vec& y0, double t0, double t1);

 private:
  struct Cycle {
    Vec y;
    CouplingValues u{};
    int wr_iterations = 0;
    bool wr_converged = true;
    long newton_iterations = 0;
    long steps = 0;
    double anode_integral = 0.0;
  };

  Cycle run_cycle(const Vec& y_n, double t_n, double dt, int degree);
  void integrate_subs(const Vec& y_n, double t_n, double dt, const Interpolant& foreign, Cycle& out);
  Vec monolithic(const Vec& y_n, double t_n, double t_end, double& anode_integral);

  const fv::Discretization& disc_;
  fv::BoundaryProvider bc_;
  CouplingConfig cfg_;
  fv::SubSystem elec_, solid_;
  Predictor hist_;
  double h_elec_ = 0.0, h_solid_ = 0.0;
};

}  // namespace cellkit::coupling
