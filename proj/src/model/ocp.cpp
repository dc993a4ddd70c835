#include "cellkit/model/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cellkit/errors.hpp"

namespace cellkit::model {

OpenCircuitPotential OpenCircuitPotential::from_expression(const std::string& text, double x_min,
                                                           double x_max) {
  if (!(x_min < x_max)) throw ConfigError("ocp: empty stoichiometry range");
  OpenCircuitPotential ocp;
  ocp.repr_ = Expression::parse(text);
  ocp.x_min_ = x_min;
  ocp.x_max_ = x_max;
  ocp.open_interval_ = true;
  return ocp;
}

OpenCircuitPotential OpenCircuitPotential::from_table(std::vector<double> x, std::vector<double> u) {
  if (x.size() != u.size() || x.size() < 2) throw ConfigError("ocp table: need >= 2 (x, U) pairs");
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (!(x[k] > x[k - 1])) throw ConfigError("ocp table: stoichiometry must be strictly increasing");
  }
  if (x.front() <= 0.0 || x.back() >= 1.0) throw ConfigError("ocp table: stoichiometry must lie in (0,1)");
  const bool increasing = u.back() > u.front();
  for (std::size_t k = 1; k < u.size(); ++k) {
    if ((u[k] - u[k - 1] > 0.0) != increasing || u[k] == u[k - 1])
      throw ConfigError("ocp table: potential must be strictly monotone");
  }

  // Fritsch-Carlson monotone slopes.
  const std::size_t n = x.size();
  std::vector<double> secant(n - 1), slope(n);
  for (std::size_t k = 0; k + 1 < n; ++k) secant[k] = (u[k + 1] - u[k]) / (x[k + 1] - x[k]);
  slope[0] = secant[0];
  slope[n - 1] = secant[n - 2];
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double h0 = x[k] - x[k - 1], h1 = x[k + 1] - x[k];
    const double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
    slope[k] = (w1 + w2) / (w1 / secant[k - 1] + w2 / secant[k]);
  }

  OpenCircuitPotential ocp;
  ocp.x_min_ = x.front();
  ocp.x_max_ = x.back();
  ocp.open_interval_ = false;
  ocp.repr_ = Table{std::move(x), std::move(u), std::move(slope)};
  return ocp;
}

Dual OpenCircuitPotential::evaluate(double x) const {
  const bool inside = open_interval_ ? (x > x_min_ && x < x_max_) : (x >= x_min_ && x <= x_max_);
  if (!inside || !std::isfinite(x)) {
    std::ostringstream os;
    os << "open-circuit potential undefined at stoichiometry " << x << " (valid range " << x_min_
       << ", " << x_max_ << ")";
    throw OcpRangeError(os.str());
  }
  Dual r;
  if (const auto* expr = std::get_if<Expression>(&repr_)) {
    r = expr->evaluate(x);
  } else {
    const auto& t = std::get<Table>(repr_);
    auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
    std::size_t k = static_cast<std::size_t>(std::distance(t.x.begin(), it));
    k = std::clamp<std::size_t>(k, 1, t.x.size() - 1) - 1;
    const double h = t.x[k + 1] - t.x[k];
    const double s = (x - t.x[k]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
    const double d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
    r.value = h00 * t.u[k] + h10 * h * t.slope[k] + h01 * t.u[k + 1] + h11 * h * t.slope[k + 1];
    r.deriv = (d00 * t.u[k] + d01 * t.u[k + 1]) / h + d10 * t.slope[k] + d11 * t.slope[k + 1];
  }
  if (!std::isfinite(r.value) || !std::isfinite(r.deriv)) {
    std::ostringstream os;
    os << "open-circuit potential not finite at stoichiometry " << x;
    throw OcpRangeError(os.str());
  }
  return r;
}

std::string OpenCircuitPotential::describe() const {
  if (const auto* expr = std::get_if<Expression>(&repr_)) return "expression: " + expr->text();
  return "table: " + std::to_string(std::get<Table>(repr_).x.size()) + " samples";
}

}  // namespace cellkit::model
