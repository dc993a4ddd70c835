#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cellkit/errors.hpp"
#include "cellkit/studies/studies.hpp"

namespace cellkit::studies {

double relative_error(const Vec& sim, const Vec& ref) {
  if (sim.size() != ref.size()) throw Error("relative_error: length mismatch");
  const double n = ref.norm();
  if (!(n > 0.0)) throw ZeroReference("relative_error: reference has zero norm");
  return (sim - ref).norm() / n;
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, std::vector<bool> used) {
  if (x.size() != y.size()) throw Error("fit_loglog: length mismatch");
  if (used.empty()) used.assign(x.size(), true);
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0 && y[k] > 0.0) || !std::isfinite(y[k])) used[k] = false;
    if (!used[k]) continue;
    lx.push_back(std::log10(x[k]));
    ly.push_back(std::log10(y[k]));
  }
  if (lx.size() < 2) throw Error("fit_loglog: fewer than two usable points");
  const double m = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double r2 = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    const double r = ly[k] - (f.intercept + f.slope * lx[k]);
    r2 += r * r;
  }
  f.residual = std::sqrt(r2 / m);
  f.points = static_cast<int>(lx.size());
  f.used = std::move(used);
  return f;
}

double interpolate_loglog(std::vector<double> x, std::vector<double> y, double x_target) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
    const double x0 = x[idx[k]], x1 = x[idx[k + 1]];
    if (x_target >= x0 && x_target <= x1 && x0 > 0.0 && y[idx[k]] > 0.0 && y[idx[k + 1]] > 0.0) {
      if (x1 == x0) return y[idx[k]];
      const double th = (std::log(x_target) - std::log(x0)) / (std::log(x1) - std::log(x0));
      return std::exp((1.0 - th) * std::log(y[idx[k]]) + th * std::log(y[idx[k + 1]]));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double extrapolate_loglog(const std::vector<double>& x, const std::vector<double>& y, double x_target) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] > 0.0 && y[k] > 0.0) idx.push_back(k);
  if (idx.size() < 2 || !(x_target > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double lt = std::log(x_target);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(std::log(x[a]) - lt) < std::abs(std::log(x[b]) - lt); });
  const double x0 = std::log(x[idx[0]]), x1 = std::log(x[idx[1]]);
  if (x0 == x1) return std::numeric_limits<double>::quiet_NaN();
  const double y0 = std::log(y[idx[0]]), y1 = std::log(y[idx[1]]);
  return std::exp(y0 + (y1 - y0) * (lt - x0) / (x1 - x0));
}

}  // namespace cellkit::studies
