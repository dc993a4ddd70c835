#include "cellkit/studies/gates.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

namespace cellkit::studies {

namespace {

Gate slope_gate(const std::string& name, const SlopeFit& f, double lo, double hi) {
  const bool ok = f.slope >= lo && f.slope <= hi && f.residual < kMaxFitResidual;
  return {name, ok, fmt::format("slope {:.3f} in [{:.2f}, {:.2f}], residual {:.3f} < {}", f.slope, lo, hi, f.residual,
                                kMaxFitResidual)};
}

Gate below(const std::string& name, double value, double limit) {
  return {name, value < limit, fmt::format("{:.3e} < {:.0e}", value, limit)};
}

}  // namespace

bool all_pass(const std::vector<Gate>& gates) {
  return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.pass; });
}

Gate runtime_gate(const std::string& name, double seconds, double budget) {
  return {name, seconds < budget, fmt::format("{:.1f} s < {:.0f} s", seconds, budget)};
}

std::vector<Gate> space_gates(const SpaceConvergenceResult& r) {
  std::vector<Gate> g;
  for (const auto& f : r.fits) {
    // c_s at the earliest time is dominated by coarse-grid start-up error.
    if (f.field == "c_s" && f.t < 1.0) continue;
    g.push_back(slope_gate(fmt::format("{} at t = {} s", f.field, f.t), f.fit, 1.8, 2.2));
  }
  if (g.empty()) g.push_back({"space fits", false, "no slope fits"});
  return g;
}

std::vector<Gate> oracle_gates(const OracleCheckResult& r) {
  return {below("c_e profile", r.err_ce, 1e-3), below("phi_e profile", r.err_phie, 1e-3),
          below("c_s profile", r.err_cs, 1e-3), below("voltage curve", r.err_voltage, 1e-3)};
}

std::vector<Gate> coupling_gates(const CouplingConvergenceResult& r) {
  std::vector<Gate> g;
  for (const auto& f : r.fits) {
    // Error falls as N_t^-p, so the fitted slope is -p.
    const double order = -f.fit.slope;
    const bool ok = std::abs(order - f.order) <= 0.3 && f.fit.residual < kMaxFitResidual;
    g.push_back({fmt::format("order {} {}", f.order, coupling::to_string(f.mode)), ok,
                 fmt::format("observed order {:.3f} = {} +- 0.3, residual {:.3f}", order, f.order, f.fit.residual)});
  }
  std::map<std::pair<int, int>, std::pair<double, double>> pairs;  // (order, N_t) -> (explicit, implicit)
  for (const auto& row : r.rows) {
    if (row.drive != "cv") continue;
    auto& p = pairs.try_emplace({row.order, row.intervals}, NAN, NAN).first->second;
    (row.mode == coupling::CouplingMode::Explicit ? p.first : p.second) = row.error;
  }
  int shared = 0, violations = 0;
  std::string worst;
  for (const auto& [key, p] : pairs) {
    if (std::isnan(p.first) || std::isnan(p.second)) continue;
    ++shared;
    if (!(p.second <= p.first)) {
      ++violations;
      worst += fmt::format(" (order {}, N_t {}: {:.2e} > {:.2e})", key.first, key.second, p.second, p.first);
    }
  }
  if (shared > 0)
    g.push_back({"implicit <= explicit", violations == 0,
                 fmt::format("{} of {} shared points violate{}", violations, shared, worst)});
  if (g.empty()) g.push_back({"coupling fits", false, "no slope fits"});
  return g;
}

std::vector<Gate> temporal_gates(const TemporalOrderResult& r) {
  std::vector<Gate> g;
  for (const auto& [scheme, f] : r.fits) {
    if (scheme == "implicit_euler") g.push_back(slope_gate("implicit Euler", f, 0.8, 1.2));
    else g.push_back(slope_gate(scheme, f, 3.5, INFINITY));
  }
  if (g.empty()) g.push_back({"temporal fits", false, "no slope fits"});
  return g;
}

std::vector<Gate> adaptive_gates(const AdaptiveResult& r, double tol) {
  std::vector<Gate> g;
  const AdaptiveSummary *o1 = nullptr, *o4 = nullptr;
  double growth = 0.0;
  for (const auto& s : r.summary) {
    if (s.order == 1) o1 = &s;
    if (s.order == 4) o4 = &s;
    growth = std::max(growth, s.max_growth);
  }
  for (const auto* s : {o1, o4}) {
    if (!s) continue;
    g.push_back({fmt::format("order {} error", s->order), s->error < tol,
                 fmt::format("{:.3e} < {:.0e}", s->error, tol)});
  }
  g.push_back({"dt_c growth", growth <= 2.0, fmt::format("largest ratio {:.6f} <= 2", growth)});
  if (o1 && o4)
    g.push_back({"max dt_c order 4 > order 1", o4->max_dt_c > o1->max_dt_c,
                 fmt::format("{:.2f} s > {:.2f} s", o4->max_dt_c, o1->max_dt_c)});
  else
    g.push_back({"orders 1 and 4", false, "missing from the study"});
  return g;
}

std::vector<Gate> work_precision_gates(const WorkPrecisionResult& r) {
  double t1 = NAN;
  bool t1_extrapolated = false;
  for (const auto& t : r.time_at_target) {
    if (t.order != 1) continue;
    t1 = t.wall;
    t1_extrapolated = t.extrapolated;
  }
  std::vector<Gate> g;
  for (const auto& t : r.time_at_target) {
    if (t.order < 3) continue;
    const bool ok = std::isfinite(t1) && std::isfinite(t.wall) && 1.5 * t.wall <= t1;
    g.push_back({fmt::format("order {} vs order 1", t.order), ok,
                 fmt::format("{:.3f} s{} x 1.5 <= {:.3f} s{}", t.wall, t.extrapolated ? " (extrapolated)" : "", t1,
                             t1_extrapolated ? " (extrapolated)" : "")});
  }
  if (g.empty()) g.push_back({"work precision", false, "no order >= 3 results"});
  return g;
}

std::vector<Gate> conditioning_gates(const ConditioningResult& c, const IndexCheckResult& i) {
  std::vector<Gate> g;
  int full = 0;
  for (const auto& row : i.rows) full += row.rank == row.size;
  g.push_back({"dG/dZ full rank", full == static_cast<int>(i.rows.size()) && full > 0,
               fmt::format("{} of {} states", full, i.rows.size())});
  g.push_back(slope_gate("cond(dG/dZ) vs dx", i.fit, -2.3, -1.7));
  for (const auto& [name, f] : c.fits) g.push_back(slope_gate("cond(" + name + ") vs dx", f, -2.3, -1.7));

  std::map<int, double> cc_cond, cv_cond;
  int gap_ok = 0, gap_n = 0;
  double worst_gap = 0.0;
  for (const auto& row : c.rows) {
    if (row.matrix != "solid") continue;
    if (row.drive == "cc") {
      cc_cond[row.cells] = row.cond;
      ++gap_n;
      const double ratio = row.eig_min / row.eig_median;
      worst_gap = std::max(worst_gap, ratio);
      gap_ok += ratio <= 1e-3;
    } else {
      cv_cond[row.cells] = row.cond;
    }
  }
  g.push_back({"CC J_s small eigenvalue", gap_n > 0 && gap_ok == gap_n,
               fmt::format("largest |eig_min|/|eig_median| {:.2e} <= 1e-3", worst_gap)});
  int red_ok = 0, red_n = 0;
  double worst = 0.0;
  for (const auto& [n, cc] : cc_cond) {
    auto it = cv_cond.find(n);
    if (it == cv_cond.end()) continue;
    ++red_n;
    worst = std::max(worst, it->second / cc);
    red_ok += it->second < 0.1 * cc;
  }
  g.push_back({"CV cond(J_s) < 0.1 CC cond(J_s)", red_n > 0 && red_ok == red_n,
               fmt::format("largest ratio {:.2e}", worst)});
  return g;
}

}  // namespace cellkit::studies
