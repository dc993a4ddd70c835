#include "cellkit/coupling/predictor.hpp"

#include <cmath>
#include <sstream>

#include "cellkit/errors.hpp"

namespace cellkit::coupling {

Interpolant::Interpolant(std::vector<double> t, std::vector<CouplingValues> u) : t_(std::move(t)), u_(std::move(u)) {
  if (t_.empty() || t_.size() != u_.size()) throw ConfigError("interpolant: need matching, non-empty nodes");
  const std::size_t n = t_.size();
  w_.assign(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      const double d = t_[j] - t_[k];
      if (d == 0.0) throw ConfigError("interpolant: repeated node");
      w_[j] /= d;
    }
}

void Interpolant::set_window(double lo, double hi) {
  const double slack = 1e-9 * std::max({std::abs(lo), std::abs(hi), hi - lo});
  lo_ = lo - slack;
  hi_ = hi + slack;
}

CouplingValues Interpolant::operator()(double t) const {
  if (t < lo_ || t > hi_) {
    std::ostringstream os;
    os << "interpolant evaluated at " << t << " outside its window";
    throw DomainError(os.str());
  }
  CouplingValues num{}, out{};
  double den = 0.0;
  for (std::size_t j = 0; j < t_.size(); ++j) {
    const double d = t - t_[j];
    if (d == 0.0) return u_[j];
    const double c = w_[j] / d;
    den += c;
    for (int q = 0; q < 4; ++q) num[q] += c * u_[j][q];
  }
  for (int q = 0; q < 4; ++q) out[q] = num[q] / den;
  return out;
}

Predictor::Predictor(std::size_t capacity) : cap_(capacity) {
  if (capacity < 1) throw ConfigError("predictor: capacity must be >= 1");
}

void Predictor::push(double t, const CouplingValues& u) {
  if (!hist_t_.empty() && !(t > hist_t_.back())) throw ConfigError("predictor: sample times must increase");
  hist_t_.push_back(t);
  hist_u_.push_back(u);
  if (hist_t_.size() > cap_) {
    hist_t_.pop_front();
    hist_u_.pop_front();
  }
}

double Predictor::last_time() const {
  if (hist_t_.empty()) throw ConfigError("predictor: empty history");
  return hist_t_.back();
}

const CouplingValues& Predictor::last() const {
  if (hist_u_.empty()) throw ConfigError("predictor: empty history");
  return hist_u_.back();
}

Interpolant Predictor::extrapolant(int degree) const {
  const auto need = static_cast<std::size_t>(degree + 1);
  if (degree < 0 || need > hist_t_.size()) throw ConfigError("predictor: not enough history for requested degree");
  std::vector<double> t(hist_t_.end() - static_cast<long>(need), hist_t_.end());
  std::vector<CouplingValues> u(hist_u_.end() - static_cast<long>(need), hist_u_.end());
  return {std::move(t), std::move(u)};
}

Interpolant Predictor::interpolant(int degree, double t_begin, double t_end, const CouplingValues& u_end) const {
  const auto need = static_cast<std::size_t>(degree);
  if (degree < 0 || need > hist_t_.size()) throw ConfigError("predictor: not enough history for requested degree");
  std::vector<double> t(hist_t_.end() - static_cast<long>(need), hist_t_.end());
  std::vector<CouplingValues> u(hist_u_.end() - static_cast<long>(need), hist_u_.end());
  t.push_back(t_end);
  u.push_back(u_end);
  Interpolant p(std::move(t), std::move(u));
  p.set_window(t_begin, t_end);
  return p;
}

}  // namespace cellkit::coupling
