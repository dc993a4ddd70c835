#include "cellkit/dae/newton.hpp"

#include <cmath>
#include <sstream>

#include "cellkit/errors.hpp"

namespace cellkit::dae {

void NewtonOptions::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol >= 0.0) || !(step_tol >= 0.0))
    throw ConfigError("newton: tolerances must be positive");
  if (max_iterations < 1) throw ConfigError("newton: max_iterations must be >= 1");
}

namespace {

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

bool finite(const Vec& v) { return v.allFinite(); }

}  // namespace

NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vec guess,
                          const NewtonOptions& opts, LinearSolver& solver) {
  opts.validate();
  NewtonResult res;
  res.x = std::move(guess);
  if (!finite(res.x)) throw NonConvergence("newton: non-finite initial guess");
  Vec r(res.x.size()), trial(res.x.size()), r_trial(res.x.size());
  residual(res.x, r);
  double rn = inf_norm(r);
  auto tolerance = [&] { return opts.abs_tol + opts.rel_tol * inf_norm(res.x); };
  res.residual_norm = rn;
  if (finite(r) && rn <= tolerance()) return res;

  SparseMatrix J;
  bool have_factor = false;
  double prev_rn = rn;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const bool refresh = !have_factor || opts.jacobian_reuse == JacobianReuse::FreshEachIteration ||
                         (opts.jacobian_reuse == JacobianReuse::Lagged && rn > opts.lag_refresh_ratio * prev_rn);
    if (refresh) {
      jacobian(res.x, J);
      solver.factor(J);
      ++res.jacobian_evaluations;
      have_factor = true;
    }
    Vec dx = -r;
    solver.solve(dx);
    if (!finite(dx)) throw NonConvergence("newton: non-finite update");

    double lambda = 1.0;
    double new_rn = 0.0;
    for (int ls = 0;; ++ls) {
      trial = res.x + lambda * dx;
      bool ok = true;
      try {
        residual(trial, r_trial);
        ok = finite(r_trial);
      } catch (const DomainError&) {
        ok = false;
      }
      if (ok) new_rn = inf_norm(r_trial);
      if (ok && (!opts.line_search || new_rn < rn || ls >= 12)) break;
      if (ls >= 30) throw NonConvergence(ok ? "newton: line search failed" : "newton: residual undefined along step");
      lambda *= 0.5;
    }
    prev_rn = rn;
    res.x.swap(trial);
    r.swap(r_trial);
    rn = new_rn;
    res.iterations = it;
    res.residual_norm = rn;
    const double step = lambda * inf_norm(dx);
    if (rn <= tolerance()) return res;
    if (opts.step_tol > 0.0 && step <= opts.step_tol * (1.0 + inf_norm(res.x))) return res;
  }
  std::ostringstream os;
  os << "newton: no convergence after " << opts.max_iterations << " iterations (residual " << rn << ")";
  throw NonConvergence(os.str());
}

Mat jacobian_fd(const ResidualFn& residual, const Vec& x, double rel_step, bool one_sided) {
  Vec r0(x.size());
  residual(x, r0);
  const Eigen::Index m = r0.size();
  Mat J(m, x.size());
  Vec xp = x, rp(m), rm(m);
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = rel_step * std::max(std::abs(x[k]), 1.0);
    xp[k] = x[k] + h;
    residual(xp, rp);
    if (one_sided) {
      J.col(k) = (rp - r0) / h;
    } else {
      xp[k] = x[k] - h;
      residual(xp, rm);
      J.col(k) = (rp - rm) / (2.0 * h);
    }
    xp[k] = x[k];
  }
  return J;
}

}  // namespace cellkit::dae
