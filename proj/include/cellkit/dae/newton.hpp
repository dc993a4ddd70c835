#pragma once

#include <functional>

#include "cellkit/dae/linalg.hpp"

namespace cellkit::dae {

enum class JacobianReuse {
  FreshEachIteration,
  FreshEachStep,
  /// Keep the Jacobian while the iteration contracts fast enough.
  Lagged,
};

struct NewtonOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  /// Also accept when the infinity norm of the update falls below this
  /// (0 disables).  Useful when the residual has a large rounding floor.
  double step_tol = 0.0;
  int max_iterations = 50;
  JacobianReuse jacobian_reuse = JacobianReuse::FreshEachIteration;
  /// Lagged policy: refresh when the residual ratio exceeds this.
  double lag_refresh_ratio = 0.5;
  /// Backtrack until the residual norm decreases.  Without it, steps are only
  /// shortened when the residual is undefined at the trial point.
  bool line_search = true;

  void validate() const;
};

struct NewtonResult {
  Vec x;
  int iterations = 0;
  double residual_norm = 0.0;
  int jacobian_evaluations = 0;
};

using ResidualFn = std::function<void(const Vec& x, Vec& r)>;
/// Fills J at x; J may be empty on the first call.
using JacobianFn = std::function<void(const Vec& x, SparseMatrix& J)>;

/// Converges when ||r||_inf <= abs_tol + rel_tol * ||x||_inf.
/// Throws NonConvergence after max_iterations; SingularMatrix propagates.
NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vec guess,
                          const NewtonOptions& opts, LinearSolver& solver);

/// Divided-difference Jacobian of `residual` at x.  Central differences with
/// step h_k = rel_step * max(|x_k|, 1) unless `one_sided`.
Mat jacobian_fd(const ResidualFn& residual, const Vec& x, double rel_step = 1e-7, bool one_sided = false);

}  // namespace cellkit::dae
