#include "cellkit/oracle/analytic.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>

#include <spdlog/spdlog.h>

#include "cellkit/errors.hpp"

namespace cellkit::oracle {

namespace {

constexpr double kPi = std::numbers::pi;

void warn_truncation(const char* what, double x, double t) {
  static std::atomic<long long> last{-1'000'000'000'000LL};
  const long long now = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now().time_since_epoch())
                            .count();
  long long prev = last.load();
  if (now - prev < 5000 || !last.compare_exchange_strong(prev, now)) return;
  spdlog::warn("{}: series truncated at k_max before reaching cutoff (x = {}, t = {})", what, x, t);
}

void check_range(double x, double len, const char* what) {
  if (!(x >= -1e-15 * len && x <= len * (1 + 1e-15))) throw DomainError(std::string(what) + ": coordinate out of range");
}

}  // namespace

AnalyticalConfig AnalyticalConfig::from_c_rate(const model::PhysicalParameters& p, double c_rate) {
  AnalyticalConfig c;
  c.params = p;
  c.i_ext = -c_rate * model::reference_current(p);
  return c;
}

void AnalyticalConfig::validate() const {
  params.validate();
  if (k_max < 1) throw ConfigError("oracle: k_max must be >= 1");
  if (!(cutoff > 0.0)) throw ConfigError("oracle: cutoff must be > 0");
}

Betas beta_coefficients(const AnalyticalConfig& cfg) {
  const auto& p = cfg.params;
  return {(1.0 - p.transference) / (p.faraday * p.diff_electrolyte) * cfg.i_ext,
          cfg.i_ext / (p.faraday * p.diff_active)};
}

SeriesValue ce_analytic(double x, double t, const AnalyticalConfig& cfg) {
  const auto& p = cfg.params;
  const double L = p.len_electrolyte;
  check_range(x, L, "ce_analytic");
  if (t < 0.0) throw DomainError("ce_analytic: negative time");
  const double be = beta_coefficients(cfg).beta_e;
  SeriesValue out;
  // The series converges only like 1/k^2 at t = 0; the initial state is known.
  if (t == 0.0) {
    out.value = p.conc_electrolyte_init;
    return out;
  }
  double sum = 0.0;
  const double amp = 4.0 * be * L;
  const double floor = cfg.cutoff * p.conc_electrolyte_init;
  out.converged = false;
  for (int k = 0; k < cfg.k_max; ++k) {
    const double m = (2 * k + 1) * kPi;
    const double mag = std::abs(amp) / (m * m) * std::exp(-(m / L) * (m / L) * p.diff_electrolyte * t);
    ++out.terms;
    if (mag < floor) {
      out.converged = true;
      break;
    }
    sum += std::cos(m * x / L) / (m * m) * std::exp(-(m / L) * (m / L) * p.diff_electrolyte * t);
  }
  if (be == 0.0) out.converged = true;
  if (!out.converged) warn_truncation("ce_analytic", x, t);
  out.value = p.conc_electrolyte_init + be * (0.5 * L - x) - amp * sum;
  return out;
}

double phie_analytic(double x, double t, const AnalyticalConfig& cfg) {
  const auto& p = cfg.params;
  const double c0 = ce_analytic(0.0, t, cfg).value;
  const double cx = ce_analytic(x, t, cfg).value;
  if (!(c0 > 0.0) || !(cx > 0.0)) throw DomainError("phie_analytic: non-positive electrolyte concentration");
  const double rt_f = p.gas_constant * p.temperature / p.faraday;
  return 2.0 * rt_f * std::asinh(-cfg.i_ext / (2.0 * p.exch_current_li)) +
         2.0 * rt_f * (1.0 - p.transference) * std::log(cx / c0) - cfg.i_ext / p.cond_ionic * x;
}

SeriesValue cs_analytic(double x_bar, double t, const AnalyticalConfig& cfg) {
  const auto& p = cfg.params;
  const double L = p.len_active;
  check_range(x_bar, L, "cs_analytic");
  if (t < 0.0) throw DomainError("cs_analytic: negative time");
  const double bs = beta_coefficients(cfg).beta_s;
  const double D = p.diff_active;
  SeriesValue out;
  if (t == 0.0) {
    out.value = p.conc_solid_init;
    return out;
  }
  out.converged = false;
  const double floor = cfg.cutoff * p.conc_solid_max;
  const double amp = 2.0 * bs * L;
  double sum = 0.0;
  for (int n = 1; n <= cfg.k_max; ++n) {
    const double m = n * kPi;
    const double decay = std::exp(-(m / L) * (m / L) * D * t);
    ++out.terms;
    if (std::abs(amp) / (m * m) * decay < floor) {
      out.converged = true;
      break;
    }
    sum += std::cos(m * x_bar / L) / (m * m) * decay;
  }
  if (bs == 0.0) out.converged = true;
  if (!out.converged) warn_truncation("cs_analytic", x_bar, t);
  out.value = p.conc_solid_init - bs * x_bar * (1.0 - x_bar / (2.0 * L)) + bs * D * t / L + amp * (1.0 / 6.0 - sum);
  return out;
}

double cell_voltage_analytic(double t, const AnalyticalConfig& cfg) {
  const auto& p = cfg.params;
  const double ce = ce_analytic(p.len_electrolyte, t, cfg).value;
  const double pe = phie_analytic(p.len_electrolyte, t, cfg);
  const double cs = cs_analytic(0.0, t, cfg).value;
  const double q = ce * cs * (p.conc_solid_max - cs);
  if (!(q > 0.0)) throw DomainError("cell_voltage_analytic: non-positive kinetic square-root argument");
  const double rt_f = p.gas_constant * p.temperature / p.faraday;
  const double u0 = p.ocp(cs / p.conc_solid_max);
  const double phis = pe + u0 + 2.0 * rt_f * std::asinh(-cfg.i_ext / (2.0 * p.rate_const_scaled * std::sqrt(q)));
  return phis - (p.len_active / p.cond_active + p.len_collector / p.cond_collector) * cfg.i_ext;
}

}  // namespace cellkit::oracle
