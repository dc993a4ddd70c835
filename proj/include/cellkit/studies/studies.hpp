#pragma once

#include <string>
#include <vector>

#include "cellkit/coupling/coupled.hpp"
#include "cellkit/model/params.hpp"
#include "cellkit/sim/simulate.hpp"

namespace cellkit::studies {

using dae::Vec;

/// ||sim - ref||_2 / ||ref||_2.  Throws ZeroReference when ||ref|| = 0.
double relative_error(const Vec& sim, const Vec& ref);

/// Least-squares line through (log10 x, log10 y).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Root-mean-square residual in log10 units.
  double residual = 0.0;
  int points = 0;
  std::vector<bool> used;
};

/// Points with used[k] == false (or non-positive values) are skipped.
/// Throws Error with fewer than two usable points.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, std::vector<bool> used = {});

/// Linear interpolation of log y against log x at x_target, over points sorted
/// by x.  Returns NaN when x_target lies outside the data.
double interpolate_loglog(std::vector<double> x, std::vector<double> y, double x_target);

/// Log-log line through the two points whose x lie nearest x_target
/// (in log distance), evaluated at x_target.  NaN with fewer than two points.
double extrapolate_loglog(const std::vector<double>& x, const std::vector<double>& y, double x_target);

/// Median of wall-clock seconds over `repetitions` calls of f.
template <class F>
double median_wall_time(int repetitions, F&& f);

// ---------------------------------------------------------------------------

struct SpaceConvergenceSpec {
  std::vector<int> grids{52, 100, 200, 400};
  std::vector<double> times{0.1, 5.0};  // s
  double c_rate = 1.0;
  double rtol = 1e-10;
};

struct SpaceRow {
  int cells;
  double dx;  // dimensionless
  double t;   // s
  double err_ce, err_phie, err_cs, err_voltage;
  long steps;
};

struct FieldFit {
  std::string field;
  double t;
  SlopeFit fit;
};

struct SpaceConvergenceResult {
  std::vector<SpaceRow> rows;
  std::vector<FieldFit> fits;  // slope of error against dx
};

SpaceConvergenceResult space_convergence(const model::PhysicalParameters& p, const SpaceConvergenceSpec& spec);

// ---------------------------------------------------------------------------

struct OracleCheckSpec {
  int cells = 200;
  double t_end = 500.0;  // s
  double c_rate = 1.0;
  double rtol = 1e-10;
  int voltage_samples = 50;
};

struct OracleCheckResult {
  double err_ce = 0.0, err_phie = 0.0, err_cs = 0.0;
  /// Largest relative voltage deviation over the sampled times.
  double err_voltage = 0.0;
  std::vector<double> t, u_sim, u_oracle;  // s, V
  struct Profile {
    std::string field;
    double x;  // m
    double sim, oracle;
  };
  std::vector<Profile> profiles;
  long steps = 0;
  double max_lithium_defect = 0.0;
};

OracleCheckResult oracle_check(const model::PhysicalParameters& p, const OracleCheckSpec& spec);

// ---------------------------------------------------------------------------

/// CC pre-phase, then the voltage reached is held and the cell runs
/// multi-domain over [t_ini, t_end].
struct CvWindow {
  int cells = 200;
  double c_rate = 1.0;
  double t_ini = 11.0;   // s
  double t_end = 101.0;  // s
  double ref_rtol = 1e-13;
};

struct CouplingConvergenceSpec {
  CvWindow window;
  std::vector<int> intervals{64, 128, 256, 512};
  std::vector<int> orders{1, 2, 3, 4};
  std::vector<coupling::CouplingMode> modes{coupling::CouplingMode::Explicit, coupling::CouplingMode::Implicit};
  double wr_tol = 1e-10;
  double sub_rtol = 1e-13;
  /// Also run the constant-current control sweep.
  bool cc_control = true;
};

struct CouplingRow {
  std::string drive;  // "cv" or "cc"
  int order;
  coupling::CouplingMode mode;
  int intervals;
  double dt_c;  // s
  double error;
  long wr_iterations;
  double wall;
};

struct CouplingFit {
  int order;
  coupling::CouplingMode mode;
  SlopeFit fit;  // slope of error against the number of intervals (negative)
};

struct CouplingConvergenceResult {
  double held_volts = 0.0;
  std::vector<CouplingRow> rows;
  std::vector<CouplingFit> fits;
};

CouplingConvergenceResult coupling_convergence(const model::PhysicalParameters& p,
                                               const CouplingConvergenceSpec& spec);

// ---------------------------------------------------------------------------

struct TemporalOrderSpec {
  int cells = 100;
  std::vector<std::string> schemes{"radau_iia3", "implicit_euler"};
  /// Steps per window for each scheme; halving sequence.
  std::vector<int> radau_steps{4, 8, 16, 32, 64};
  std::vector<int> euler_steps{64, 128, 256, 512, 1024};
  double t_end = 20.0;  // s
  double rel_amplitude = 0.05;
  double n_oscillations = 1.0;
  double ref_rtol = 1e-13;
};

struct TemporalRow {
  std::string scheme;
  int steps;
  double dt;  // s
  double error;
};

struct TemporalOrderResult {
  std::vector<TemporalRow> rows;
  std::vector<std::pair<std::string, SlopeFit>> fits;  // slope of error against dt
};

TemporalOrderResult temporal_order(const model::PhysicalParameters& p, const TemporalOrderSpec& spec);

// ---------------------------------------------------------------------------

struct SineWindow {
  int cells = 200;
  double rel_amplitude = 0.05;
  double n_oscillations = 3.0;
  double duration = 500.0;  // s
  double ref_rtol = 1e-12;
};

/// Sine voltage whose mean is the open-circuit value at the initial
/// stoichiometry.
model::OperatingMode sine_mode(const model::PhysicalParameters& p, const SineWindow& w);

struct AdaptiveSpec {
  SineWindow window;
  std::vector<int> orders{1, 2, 3, 4};
  coupling::CouplingMode mode = coupling::CouplingMode::Implicit;
  double tol = 5e-6;
  double dt_c_init = 0.01;  // s
  double wr_tol = 1e-10;
};

struct AdaptiveInterval {
  int order;
  double t, dt_c;  // s
  double epsilon;
  int wr_iterations;
  bool accepted;
  double voltage;     // V, at the interval end
  double current_bv;  // A/m^2, at the interval end
};

struct AdaptiveSummary {
  int order;
  double error;
  double max_dt_c;       // s
  double max_growth;     // largest dt ratio between consecutive accepted intervals
  long intervals, rejected;
  double max_lithium_defect;
  double wall;
};

struct AdaptiveResult {
  std::vector<AdaptiveInterval> intervals;
  std::vector<AdaptiveSummary> summary;
  /// Reference trajectory sampled on a uniform grid.
  std::vector<double> ref_t, ref_voltage, ref_current_bv;
};

AdaptiveResult sine_adaptive(const model::PhysicalParameters& p, const AdaptiveSpec& spec);

// ---------------------------------------------------------------------------

struct WorkPrecisionSpec {
  std::string case_name = "cv";  // "cv" (CvWindow) or "sine" (SineWindow)
  CvWindow cv{200, 1.0, 11.0, 501.0, 1e-13};
  SineWindow sine;
  std::vector<double> tols{1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10};
  std::vector<int> orders{1, 2, 3, 4};
  coupling::CouplingMode mode = coupling::CouplingMode::Implicit;
  double dt_c_init = 0.01;  // s
  int repetitions = 3;
  /// A sweep stops early once its error falls below target / 10.
  double target = 1e-6;
  /// Per-run wall-time cap in seconds; later tolerances of the order are skipped.
  double time_cap = 120.0;
};

struct WorkRow {
  std::string case_name;
  int order;
  double tol;
  double wall;
  double error;
  long intervals, rejected;
};

struct TargetTime {
  int order;
  double wall;  // NaN with fewer than two usable points
  /// True when the target lies outside the measured errors and the two
  /// nearest points were extended log-log.
  bool extrapolated;
};

struct WorkPrecisionResult {
  std::vector<WorkRow> rows;
  std::vector<TargetTime> time_at_target;
};

WorkPrecisionResult work_precision(const model::PhysicalParameters& p, const WorkPrecisionSpec& spec);

// ---------------------------------------------------------------------------

struct ConditioningSpec {
  std::vector<int> grids{8, 32, 128};
  double t_eval = 101.0;  // s
  double c_rate = 1.0;
  double cv_volts = -1.0;  // negative: hold the voltage after an 11 s CC phase
  double dt = 1e-3;        // dimensionless step for the step Jacobians
};

struct ConditioningRow {
  std::string drive;   // "cc" or "cv"
  std::string matrix;  // "full", "electrolyte", "solid"
  int cells;
  double dx;
  double cond;
  double eig_min, eig_median, eig_max;  // magnitudes
};

struct EigenRow {
  std::string drive, matrix;
  int cells;
  int index;
  double magnitude;
};

struct ConditioningResult {
  std::vector<ConditioningRow> rows;
  std::vector<EigenRow> eigenvalues;
  std::vector<std::pair<std::string, SlopeFit>> fits;  // "<drive>/<matrix>", cond against dx
};

ConditioningResult conditioning(const model::PhysicalParameters& p, const ConditioningSpec& spec);

struct IndexCheckSpec {
  std::vector<int> grids{8, 32, 128};
  std::vector<double> times{0.0, 5.0, 101.0};  // s, CC at 1C
  double c_rate = 1.0;
};

struct IndexRow {
  int cells;
  double dx;
  double t;
  int size;
  int rank;
  double sigma_max, sigma_min;
  double cond;
};

struct IndexCheckResult {
  std::vector<IndexRow> rows;
  SlopeFit fit;  // cond against dx at the first time
  /// Rows of dG/dZ that lose diagonal dominance, tagged with the grid.
  std::vector<std::string> non_dominant_rows;
};

IndexCheckResult index_check(const model::PhysicalParameters& p, const IndexCheckSpec& spec);

}  // namespace cellkit::studies

#include "cellkit/studies/timing.ipp"
