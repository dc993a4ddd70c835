#pragma once

#include "cellkit/model/params.hpp"

namespace cellkit::oracle {

/// Closed-form constant-current solution.  All inputs and outputs are SI.
struct AnalyticalConfig {
  model::PhysicalParameters params;
  /// Imposed current density in A/m^2 (= -c_rate * i_1C).
  double i_ext = 0.0;
  int k_max = 200;
  /// Series stop once a term falls below cutoff times the concentration scale.
  double cutoff = 1e-14;

  static AnalyticalConfig from_c_rate(const model::PhysicalParameters& p, double c_rate);
  void validate() const;
};

struct Betas {
  double beta_e;  // mol/m^4
  double beta_s;  // mol/m^4
};

struct SeriesValue {
  double value = 0.0;
  int terms = 0;
  /// False when k_max terms were summed before the cutoff was reached.
  bool converged = true;
};

Betas beta_coefficients(const AnalyticalConfig& cfg);

/// Electrolyte concentration at 0 <= x <= L_e.
SeriesValue ce_analytic(double x, double t, const AnalyticalConfig& cfg);
/// Electrolyte potential at 0 <= x <= L_e.
double phie_analytic(double x, double t, const AnalyticalConfig& cfg);
/// Solid concentration at 0 <= x_bar <= L_am measured from the interface.
SeriesValue cs_analytic(double x_bar, double t, const AnalyticalConfig& cfg);
/// Collector potential U(t).
double cell_voltage_analytic(double t, const AnalyticalConfig& cfg);

}  // namespace cellkit::oracle
