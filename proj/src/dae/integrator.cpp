#include "cellkit/dae/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "cellkit/errors.hpp"
#include "cellkit/simd/kernels.hpp"

namespace cellkit::dae {

std::vector<int> DaeSystem::band_order() const {
  std::vector<int> o(size());
  std::iota(o.begin(), o.end(), 0);
  return o;
}

std::vector<bool> DaeSystem::potential_mask() const { return std::vector<bool>(size(), false); }

double DaeSystem::flux_functional(double, const Vec&) const { return 0.0; }

void StepController::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw ConfigError("step controller: tolerances must be positive");
  if (!(min_factor > 0.0 && min_factor < 1.0 && max_factor > 1.0))
    throw ConfigError("step controller: need 0 < min_factor < 1 < max_factor");
  if (!(safety > 0.0 && safety <= 1.0)) throw ConfigError("step controller: safety must lie in (0,1]");
  if (fixed_dt < 0.0 || dt_min < 0.0 || !(dt_max > 0.0)) throw ConfigError("step controller: invalid step bounds");
}

Vec step_residual(const IRKScheme& scheme, const DaeSystem& sys, double t_n, const Vec& y_n, const Vec& z, double h) {
  const int s = scheme.stages;
  const auto n = static_cast<Eigen::Index>(sys.size());
  const auto nd = static_cast<Eigen::Index>(sys.n_differential());
  if (z.size() != s * n) throw Error("step_residual: stage vector has wrong length");
  std::vector<Vec> f(s, Vec(n));
  for (int j = 0; j < s; ++j) {
    const Vec yj = y_n + z.segment(j * n, n);
    sys.residual(t_n + scheme.c[j] * h, yj, f[j]);
  }
  Vec r(s * n);
  for (int i = 0; i < s; ++i) {
    for (Eigen::Index k = 0; k < nd; ++k) {
      double acc = 0.0;
      for (int j = 0; j < s; ++j) acc += scheme.a(i, j) * f[j][k];
      r[i * n + k] = z[i * n + k] - h * acc;
    }
    for (Eigen::Index k = nd; k < n; ++k) r[i * n + k] = -h * f[i][k];
  }
  return r;
}

Integrator::Integrator(const DaeSystem& sys, IRKScheme scheme, IntegratorOptions opts)
    : sys_(sys), scheme_(std::move(scheme)), opts_(std::move(opts)), n_(sys.size()), nd_(sys.n_differential()) {
  scheme_.validate();
  opts_.control.validate();
  if (!scheme_.stiffly_accurate) throw Error("integrator: scheme must be stiffly accurate");
  order_ = sys_.band_order();
  pos_ = invert_permutation(order_);
  const auto mask = sys_.potential_mask();
  const double atol_pot = opts_.control.atol_potential < 0.0 ? 100.0 * opts_.control.atol : opts_.control.atol_potential;
  atol_ = Vec(static_cast<Eigen::Index>(n_));
  for (std::size_t k = 0; k < n_; ++k) atol_[static_cast<Eigen::Index>(k)] = mask[k] ? atol_pot : opts_.control.atol;
}

void Integrator::evaluate_jacobian(double t, const Vec& y, IntegrationStats& st) {
  Triplets tr;
  sys_.jacobian(t, y, tr);
  if (jac_.nnz() == 0 && jac_.rows() == 0) {
    jac_ = SparseMatrix::from_triplets(n_, n_, tr);
  } else {
    jac_.refill(tr);
  }
  jac_valid_ = true;
  jac_t_ = t;
  ++st.jacobian_evaluations;
}

void Integrator::build_stage_matrix(double h, const std::vector<Vec>* stage_points, double t, IntegrationStats& st) {
  const int s = scheme_.stages;
  if (stage_points != nullptr) {
    stage_jacs_.resize(s);
    for (int j = 0; j < s; ++j) {
      Triplets tr;
      sys_.jacobian(t + scheme_.c[j] * h, (*stage_points)[j], tr);
      if (stage_jacs_[j].rows() == 0)
        stage_jacs_[j] = SparseMatrix::from_triplets(n_, n_, tr);
      else
        stage_jacs_[j].refill(tr);
      ++st.jacobian_evaluations;
    }
  }
  const SparseMatrix& j0 = stage_points ? stage_jacs_[0] : jac_;
  const std::size_t ns = n_ * static_cast<std::size_t>(s);
  if (stage_lu_.size() != ns) {
    const auto [kl, ku] = bandwidth(j0, pos_);
    stage_lu_ = BandLU(ns, kl * s + s - 1, ku * s + s - 1);
  }
  stage_lu_.set_zero();
  const auto& rp = j0.row_ptr();
  const auto& ci = j0.col_idx();
  for (std::size_t r = 0; r < n_; ++r) {
    const std::size_t pr = static_cast<std::size_t>(pos_[r]) * s;
    for (int q = rp[r]; q < rp[r + 1]; ++q) {
      const std::size_t pc = static_cast<std::size_t>(pos_[ci[q]]) * s;
      if (r < nd_) {
        for (int j = 0; j < s; ++j) {
          const double v = stage_points ? stage_jacs_[j].values()[q] : jac_.values()[q];
          for (int i = 0; i < s; ++i) stage_lu_.at(pr + i, pc + j) -= h * scheme_.a(i, j) * v;
        }
      } else {
        for (int i = 0; i < s; ++i) {
          const double v = stage_points ? stage_jacs_[i].values()[q] : jac_.values()[q];
          stage_lu_.at(pr + i, pc + i) -= h * v;
        }
      }
    }
    if (r < nd_)
      for (int i = 0; i < s; ++i) stage_lu_.at(pr + i, pr + i) += 1.0;
  }
  stage_lu_.factor();
  ++st.factorizations;
}

double Integrator::weighted_norm(const Vec& v, const Vec& w) const {
  const auto nn = static_cast<std::size_t>(v.size());
  return std::sqrt(simd::active().weighted_sq_sum(v.data(), w.data(), nn) / static_cast<double>(nn));
}

Vec Integrator::weights(const Vec& a, const Vec& b) const {
  const Vec m = a.cwiseAbs().cwiseMax(b.cwiseAbs());
  Vec w(m.size());
  simd::active().error_weights(m.data(), atol_.data(), opts_.control.rtol, static_cast<std::size_t>(m.size()), w.data());
  return w;
}

Vec Integrator::interpolate(const Vec& y_n, const std::vector<Vec>& z, double theta) const {
  const int s = scheme_.stages;
  Vec u = y_n;
  for (int i = 0; i < s; ++i) {
    double l = theta / scheme_.c[i];
    for (int j = 0; j < s; ++j)
      if (j != i) l *= (theta - scheme_.c[j]) / (scheme_.c[i] - scheme_.c[j]);
    u += l * z[i];
  }
  return u;
}

bool Integrator::solve_stages(double t, const Vec& y, double h, std::vector<Vec>& z, IntegrationStats& st,
                              bool fresh_jac) {
  const int s = scheme_.stages;
  const auto n = static_cast<Eigen::Index>(n_);
  const bool per_iteration = opts_.jacobian_reuse == JacobianReuse::FreshEachIteration;
  std::vector<Vec> pts(s), f(s, Vec(n));
  const Vec w = weights(y, y);
  Vec rhs(n * s);
  const double uround = std::numeric_limits<double>::epsilon();
  fac_con_ = std::pow(std::max(fac_con_, uround), 0.8);
  double dn_old = 0.0, theta = 0.0, thq_old = 0.0;
  try {
    if (!per_iteration) {
      if (fresh_jac || !jac_valid_) evaluate_jacobian(t, y, st);
      build_stage_matrix(h, nullptr, t, st);
    }
    for (int it = 1; it <= opts_.newton_max_iterations; ++it) {
      for (int j = 0; j < s; ++j) {
        pts[j] = y + z[j];
        sys_.residual(t + scheme_.c[j] * h, pts[j], f[j]);
        if (!f[j].allFinite()) return false;
      }
      if (per_iteration) build_stage_matrix(h, &pts, t, st);
      for (std::size_t r = 0; r < n_; ++r) {
        const std::size_t pr = static_cast<std::size_t>(pos_[r]) * s;
        const auto rr = static_cast<Eigen::Index>(r);
        for (int i = 0; i < s; ++i) {
          double val;
          if (r < nd_) {
            double acc = 0.0;
            for (int j = 0; j < s; ++j) acc += scheme_.a(i, j) * f[j][rr];
            val = z[i][rr] - h * acc;
          } else {
            val = -h * f[i][rr];
          }
          rhs[static_cast<Eigen::Index>(pr + i)] = -val;
        }
      }
      stage_lu_.solve(rhs.data());
      double sq = 0.0;
      for (std::size_t r = 0; r < n_; ++r) {
        const std::size_t pr = static_cast<std::size_t>(pos_[r]) * s;
        const auto rr = static_cast<Eigen::Index>(r);
        for (int i = 0; i < s; ++i) {
          const double d = rhs[static_cast<Eigen::Index>(pr + i)];
          z[i][rr] += d;
          const double q = d / w[rr];
          sq += q * q;
        }
      }
      ++st.newton_iterations;
      const double dn = std::sqrt(sq / static_cast<double>(n * s));
      if (!std::isfinite(dn)) return false;
      if (it > 1) {
        const double thq = dn / dn_old;
        theta = (it == 2) ? thq : std::sqrt(thq * thq_old);
        thq_old = thq;
        if (theta >= 0.99) return false;
        fac_con_ = theta / (1.0 - theta);
        const int left = opts_.newton_max_iterations - it;
        if (!per_iteration && fac_con_ * dn * std::pow(theta, left) > fnewt_ * 1e2) return false;
      }
      dn_old = std::max(dn, uround);
      if (fac_con_ * dn <= fnewt_) return true;
    }
  } catch (const DomainError& e) {
    spdlog::debug("newton stage solve: {}", e.what());
    return false;
  } catch (const SingularMatrix& e) {
    spdlog::debug("newton stage solve: {}", e.what());
    return false;
  }
  return false;
}

double Integrator::estimate_error(double t, const Vec& y, double h, const std::vector<Vec>& z, const Vec& y_new,
                                  bool refine, IntegrationStats& st) {
  const int s = scheme_.stages;
  const auto n = static_cast<Eigen::Index>(n_);
  if (opts_.jacobian_reuse == JacobianReuse::FreshEachIteration || !jac_valid_) evaluate_jacobian(t, y, st);
  const double g = 1.0 / (h * scheme_.gamma0);
  if (err_lu_.size() != n_) {
    const auto [kl, ku] = bandwidth(jac_, pos_);
    err_lu_ = BandLU(n_, kl, ku);
  }
  err_lu_.set_zero();
  const auto& rp = jac_.row_ptr();
  const auto& ci = jac_.col_idx();
  const auto& v = jac_.values();
  for (std::size_t r = 0; r < n_; ++r) {
    const std::size_t pr = static_cast<std::size_t>(pos_[r]);
    for (int q = rp[r]; q < rp[r + 1]; ++q) err_lu_.at(pr, static_cast<std::size_t>(pos_[ci[q]])) -= v[q];
    if (r < nd_) err_lu_.at(pr, pr) += g;
  }
  err_lu_.factor();
  ++st.factorizations;

  Vec mz = Vec::Zero(n);
  for (int i = 0; i < s; ++i) mz.head(static_cast<Eigen::Index>(nd_)) += (scheme_.e[i] / scheme_.gamma0 / h) * z[i].head(static_cast<Eigen::Index>(nd_));
  const Vec w = weights(y, y_new);
  Vec f0(n);
  auto solve_err = [&](const Vec& f) {
    Vec rhs = f + mz;
    Vec b(n);
    for (std::size_t k = 0; k < n_; ++k) b[pos_[k]] = rhs[static_cast<Eigen::Index>(k)];
    err_lu_.solve(b.data());
    Vec out(n);
    for (std::size_t k = 0; k < n_; ++k) out[static_cast<Eigen::Index>(k)] = b[pos_[k]];
    return out;
  };
  sys_.residual(t, y, f0);
  Vec err = solve_err(f0);
  double en = std::max(weighted_norm(err, w), 1e-10);
  if (en >= 1.0 && refine) {
    Vec f1(n);
    try {
      sys_.residual(t, y + err, f1);
      if (f1.allFinite()) {
        err = solve_err(f1);
        en = std::max(weighted_norm(err, w), 1e-10);
      }
    } catch (const DomainError&) {
    }
  }
  return std::isfinite(en) ? en : 1e10;
}

IntegrationResult Integrator::integrate(const Vec& y0, double t0, double t1) {
  if (!(t1 > t0)) throw Error("integrate: need t1 > t0");
  if (static_cast<std::size_t>(y0.size()) != n_) throw Error("integrate: state size mismatch");
  const auto& ctl = opts_.control;
  const double span = t1 - t0;
  const bool fixed = ctl.fixed_dt > 0.0;
  const bool embedded = scheme_.has_embedded;
  const int s = scheme_.stages;
  const auto n = static_cast<Eigen::Index>(n_);
  const double uround = std::numeric_limits<double>::epsilon();
  fnewt_ = std::max(10.0 * uround / ctl.rtol, std::min(0.03, std::sqrt(ctl.rtol)));
  fac_con_ = 1.0;
  jac_valid_ = false;
  const double dt_min = ctl.dt_min > 0.0 ? ctl.dt_min : 1e-14 * std::max({span, std::abs(t0), std::abs(t1)});
  const double exponent = embedded ? 0.25 : 0.5;

  std::vector<double> samples = opts_.sample_times;
  std::sort(samples.begin(), samples.end());
  std::size_t next_sample = 0;
  while (next_sample < samples.size() && samples[next_sample] <= t0) ++next_sample;

  IntegrationResult out;
  auto& st = out.stats;
  double t = t0;
  Vec y = y0;
  if (opts_.store_steps) {
    out.steps.t.push_back(t);
    out.steps.y.push_back(y);
  }
  double h = fixed ? ctl.fixed_dt : (ctl.initial_dt > 0.0 ? ctl.initial_dt : 1e-6 * span);
  h = std::min(h, ctl.dt_max);
  bool first = true, last_rejected = false, have_prev = false;
  std::vector<Vec> z(s, Vec::Zero(n)), z_prev;
  double h_prev = 0.0;
  Vec y_prev;
  Vec y_new(n), y_half(n);
  long steps = 0;

  while (t < t1) {
    if (++steps > ctl.max_steps) throw StepSizeUnderflow("integrate: maximum number of steps exceeded");
    bool final_step = false;
    if (t + h >= t1 - 1e-12 * span) {
      h = t1 - t;
      final_step = true;
    }
    if (opts_.jacobian_reuse == JacobianReuse::FreshEachStep) jac_valid_ = false;

    if (have_prev && embedded && !fixed) {
      for (int i = 0; i < s; ++i) z[i] = interpolate(y_prev, z_prev, 1.0 + scheme_.c[i] * h / h_prev) - y;
    } else {
      for (int i = 0; i < s; ++i) z[i].setZero();
    }

    double err = 0.0;
    bool ok = true;
    std::vector<Vec> za, zb;
    if (embedded || fixed) {
      ok = solve_stages(t, y, h, z, st, false);
      if (!ok && have_prev) {
        for (int i = 0; i < s; ++i) z[i].setZero();
        ok = solve_stages(t, y, h, z, st, true);
      }
      if (ok) {
        y_new = y + z[s - 1];
        if (!fixed) err = estimate_error(t, y, h, z, y_new, first || last_rejected, st);
      }
    } else {
      za.assign(s, Vec::Zero(n));
      zb.assign(s, Vec::Zero(n));
      ok = solve_stages(t, y, h, z, st, false);
      if (ok) ok = solve_stages(t, y, 0.5 * h, za, st, false);
      if (ok) {
        y_half = y + za[s - 1];
        ok = solve_stages(t + 0.5 * h, y_half, 0.5 * h, zb, st, true);
      }
      if (ok) {
        y_new = y_half + zb[s - 1];
        const Vec coarse = y + z[s - 1];
        err = std::max(weighted_norm(y_new - coarse, weights(y, y_new)), 1e-10);
      }
    }

    if (!ok) {
      ++st.newton_failures;
      jac_valid_ = false;
      if (fixed) {
        std::ostringstream os;
        os << "integrate: Newton failed with fixed step " << h << " at t = " << t;
        throw NonConvergence(os.str());
      }
      h *= 0.5;
      last_rejected = true;
      have_prev = false;
      if (h < dt_min) {
        std::ostringstream os;
        os << "integrate: step size underflow at t = " << t << " (Newton failures)";
        throw StepSizeUnderflow(os.str());
      }
      continue;
    }

    if (fixed || err <= 1.0) {
      const double flux_before = st.flux_integral;
      if (embedded || fixed) {
        if (embedded || s == 1) {
          for (int j = 0; j < s; ++j)
            st.flux_integral += h * scheme_.b[j] * sys_.flux_functional(t + scheme_.c[j] * h, y + z[j]);
        }
      } else {
        st.flux_integral += 0.5 * h * (sys_.flux_functional(t + 0.5 * h, y_half) + sys_.flux_functional(t + h, y_new));
      }
      const double t_new = final_step ? t1 : t + h;
      while (next_sample < samples.size() && samples[next_sample] <= t_new + 1e-14 * span) {
        const double theta = (samples[next_sample] - t) / h;
        Vec ys;
        if (embedded || fixed) {
          ys = interpolate(y, z, theta);
        } else {
          ys = theta <= 0.5 ? Vec(y + 2.0 * theta * (y_half - y)) : Vec(y_half + (2.0 * theta - 1.0) * (y_new - y_half));
        }
        out.samples.t.push_back(samples[next_sample]);
        out.samples.y.push_back(std::move(ys));
        ++next_sample;
      }
      y_prev = y;
      z_prev = z;
      h_prev = h;
      have_prev = true;
      t = t_new;
      y = y_new;
      ++st.accepted;
      st.max_dt = std::max(st.max_dt, h);
      if (opts_.store_steps) {
        out.steps.t.push_back(t);
        out.steps.y.push_back(y);
        out.step_flux.push_back(st.flux_integral - flux_before);
      }
      double fac = 1.0;
      if (!fixed) {
        fac = ctl.safety * std::pow(err, -exponent);
        fac = std::clamp(fac, ctl.min_factor, last_rejected ? 1.0 : ctl.max_factor);
      }
      const double h_next = std::min(h * fac, ctl.dt_max);
      if (!final_step || st.accepted == 1) st.last_dt = h_next;
      if (fixed) {
        h = ctl.fixed_dt;
      } else {
        h = h_next;
      }
      last_rejected = false;
      first = false;
    } else {
      ++st.rejected;
      const double fac = std::max(ctl.min_factor, ctl.safety * std::pow(err, -exponent));
      h *= std::min(fac, 1.0);
      last_rejected = true;
      if (h < dt_min) {
        std::ostringstream os;
        os << "integrate: step size underflow at t = " << t << " (error " << err << ")";
        throw StepSizeUnderflow(os.str());
      }
    }
  }
  out.y_end = y;
  return out;
}

}  // namespace cellkit::dae
