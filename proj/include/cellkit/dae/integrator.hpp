#pragma once

#include <limits>
#include <vector>

#include "cellkit/dae/linalg.hpp"
#include "cellkit/dae/newton.hpp"
#include "cellkit/dae/tableau.hpp"

namespace cellkit::dae {

/// Semi-explicit index-1 DAE  W' = F(t, W, Z),  0 = G(t, W, Z)  with y = [W; Z].
class DaeSystem {
 public:
  virtual ~DaeSystem() = default;
  virtual std::size_t size() const = 0;
  virtual std::size_t n_differential() const = 0;
  /// f = [F; G], same length as y.
  virtual void residual(double t, const Vec& y, Vec& f) const = 0;
  /// Entries of d[F; G]/dy.  The (row, col) sequence must not depend on y.
  virtual void jacobian(double t, const Vec& y, Triplets& out) const = 0;
  /// Symmetric reordering that makes the Jacobian banded (identity by default).
  virtual std::vector<int> band_order() const;
  /// Components measured with the potential absolute tolerance.
  virtual std::vector<bool> potential_mask() const;
  /// Scalar rate whose time integral the integrator accumulates exactly with
  /// the quadrature of the scheme (e.g. a boundary molar flux).
  virtual double flux_functional(double t, const Vec& y) const;
};

struct StepController {
  double rtol = 1e-6;
  double atol = 1e-10;
  /// Absolute tolerance for potential-like components; negative means 100 * atol.
  double atol_potential = -1.0;
  double safety = 0.9;
  double min_factor = 0.2;
  double max_factor = 8.0;
  double dt_min = 0.0;  // 0: 1e-14 * span
  double dt_max = std::numeric_limits<double>::infinity();
  double initial_dt = 0.0;  // 0: 1e-6 * span
  /// Positive: fixed steps of this size, no error control.
  double fixed_dt = 0.0;
  long max_steps = 10'000'000;

  void validate() const;
};

struct IntegratorOptions {
  StepController control;
  JacobianReuse jacobian_reuse = JacobianReuse::FreshEachStep;
  int newton_max_iterations = 7;
  /// Extra output times inside (t0, t1]; filled by collocation interpolation.
  std::vector<double> sample_times;
  bool store_steps = true;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> y;
};

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
  long newton_iterations = 0;
  long newton_failures = 0;
  long jacobian_evaluations = 0;
  long factorizations = 0;
  double flux_integral = 0.0;
  double last_dt = 0.0;
  double max_dt = 0.0;
};

struct IntegrationResult {
  Trajectory steps;
  Trajectory samples;
  /// Flux integral over each stored step (steps.t[k] -> steps.t[k + 1]).
  std::vector<double> step_flux;
  Vec y_end;
  IntegrationStats stats;
};

/// Stage residual of one step: for each stage i,
///   W rows: Z_i^W - h sum_j a_ij F(Y_j),   Z rows: -h G(Y_i),
/// with Y_i = y_n + Z_i.  Stage increments are stacked stage-major.
Vec step_residual(const IRKScheme& scheme, const DaeSystem& sys, double t_n, const Vec& y_n, const Vec& stage_increments,
                  double h);

class Integrator {
 public:
  Integrator(const DaeSystem& sys, IRKScheme scheme, IntegratorOptions opts);

  IntegrationResult integrate(const Vec& y0, double t0, double t1);

  const IRKScheme& scheme() const { return scheme_; }

 private:
  struct Attempt;

  bool solve_stages(double t, const Vec& y, double h, std::vector<Vec>& z, IntegrationStats& st, bool fresh_jac);
  double estimate_error(double t, const Vec& y, double h, const std::vector<Vec>& z, const Vec& y_new,
                        bool refine, IntegrationStats& st);
  void evaluate_jacobian(double t, const Vec& y, IntegrationStats& st);
  void build_stage_matrix(double h, const std::vector<Vec>* stage_points, double t, IntegrationStats& st);
  double weighted_norm(const Vec& v, const Vec& w) const;
  Vec weights(const Vec& a, const Vec& b) const;
  Vec interpolate(const Vec& y_n, const std::vector<Vec>& z, double theta) const;

  const DaeSystem& sys_;
  IRKScheme scheme_;
  IntegratorOptions opts_;
  std::size_t n_, nd_;
  std::vector<int> order_, pos_;
  Vec atol_;
  SparseMatrix jac_;
  bool jac_valid_ = false;
  double jac_t_ = 0.0;
  std::vector<SparseMatrix> stage_jacs_;
  BandLU stage_lu_;
  BandLU err_lu_;
  double err_lu_h_ = -1.0;
  double fac_con_ = 1.0;
  double fnewt_ = 0.0;
};

}  // namespace cellkit::dae
