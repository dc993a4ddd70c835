#pragma once

#include <complex>
#include <string>

#include "cellkit/dae/linalg.hpp"

namespace cellkit::dae {

/// Butcher tableau of an implicit Runge-Kutta method.
struct IRKScheme {
  std::string name;
  int stages = 0;
  Mat a;
  Vec b;
  Vec c;
  int classical_order = 0;
  bool stiffly_accurate = false;

  /// Embedded estimate data (Radau family only): real eigenvalue gamma0 of A
  /// and the weights e = (bhat - b)^T A^{-1} acting on stage increments.
  bool has_embedded = false;
  double gamma0 = 0.0;
  Vec e;

  /// Stability function R(z) = 1 + z b^T (I - zA)^{-1} 1.
  std::complex<double> stability(std::complex<double> z) const;

  void validate() const;
};

IRKScheme implicit_euler();

/// s-stage Radau IIA built from its collocation conditions (nodes are the
/// right Radau points).  Order 2s - 1.
IRKScheme radau_iia(int stages = 3);

/// "implicit_euler" or "radau_iia3".
IRKScheme scheme_by_name(const std::string& name);

}  // namespace cellkit::dae
