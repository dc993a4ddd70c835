#pragma once

#include <string>
#include <variant>
#include <vector>

#include "cellkit/model/expression.hpp"

namespace cellkit::model {

/// Open-circuit potential U0 of the active material as a function of the
/// dimensionless stoichiometry c_s / c_s,max.  Either an analytic expression of
/// `x` or a monotone sample table interpolated with monotone cubic Hermite
/// splines.  Evaluating outside the valid range raises OcpRangeError.
class OpenCircuitPotential {
 public:
  /// Default curve shipped with the project; U0(13000/31000) = 0.1026 V.
  static constexpr const char* kDefaultExpression = "0.18 - 0.2*x + 0.02*log((1-x)/x)";

  static OpenCircuitPotential from_expression(const std::string& text, double x_min = 0.0,
                                              double x_max = 1.0);
  static OpenCircuitPotential from_table(std::vector<double> x, std::vector<double> u);
  static OpenCircuitPotential default_curve() { return from_expression(kDefaultExpression); }

  /// U0 in volts and dU0/dx.
  Dual evaluate(double x) const;
  double operator()(double x) const { return evaluate(x).value; }

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::string describe() const;

 private:
  struct Table {
    std::vector<double> x, u, slope;
  };

  OpenCircuitPotential() = default;

  std::variant<Expression, Table> repr_ = Table{};
  double x_min_ = 0.0;
  double x_max_ = 1.0;
  bool open_interval_ = true;
};

}  // namespace cellkit::model
