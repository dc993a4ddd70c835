#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <vector>

namespace cellkit::coupling {

/// Interface unknowns (c_e,-1-, phi_e,-1-, c_s,0+, phi_s,0+), dimensionless.
using CouplingValues = std::array<double, 4>;

/// Polynomial through a fixed set of nodes, evaluated in barycentric form.
class Interpolant {
 public:
  Interpolant() = default;
  Interpolant(std::vector<double> t, std::vector<CouplingValues> u);

  CouplingValues operator()(double t) const;
  int degree() const { return static_cast<int>(t_.size()) - 1; }
  const std::vector<double>& nodes() const { return t_; }

  /// Restrict evaluation to [lo, hi] (with a relative slack); outside it
  /// evaluation throws DomainError.
  void set_window(double lo, double hi);

 private:
  std::vector<double> t_;
  std::vector<CouplingValues> u_;
  std::vector<double> w_;
  double lo_ = -1e300, hi_ = 1e300;
};

/// History of synchronized coupling values.
class Predictor {
 public:
  explicit Predictor(std::size_t capacity = 8);

  /// Times must increase strictly.
  void push(double t, const CouplingValues& u);
  void clear() { hist_t_.clear(), hist_u_.clear(); }

  std::size_t size() const { return hist_t_.size(); }
  std::size_t capacity() const { return cap_; }
  double last_time() const;
  const CouplingValues& last() const;

  /// Degree-d polynomial through the newest d+1 samples (extrapolation).
  Interpolant extrapolant(int degree) const;
  /// Degree-d polynomial through the newest d samples and (t_end, u_end),
  /// valid on [t_begin, t_end] only.
  Interpolant interpolant(int degree, double t_begin, double t_end, const CouplingValues& u_end) const;

 private:
  std::size_t cap_;
  std::deque<double> hist_t_;
  std::deque<CouplingValues> hist_u_;
};

}  // namespace cellkit::coupling
