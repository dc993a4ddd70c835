#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace cellkit::model {

/// Value together with its derivative with respect to the single variable `x`.
struct Dual {
  double value = 0.0;
  double deriv = 0.0;
};

/// Scalar expression of one variable `x`, parsed once and evaluated many times.
///
/// Grammar: numbers, `x`, `pi`, binary + - * / ^, unary minus, parentheses and
/// the functions exp, log, sqrt, sinh, cosh, tanh, atan, sin, cos, abs.
/// Evaluation propagates forward-mode derivatives, so callers get dU/dx for free.
class Expression {
 public:
  struct Node;

  /// Throws cellkit::ConfigError with the offending column on malformed input.
  static Expression parse(std::string_view text);

  Dual evaluate(double x) const;
  const std::string& text() const { return text_; }

 private:
  Expression(std::string text, std::shared_ptr<const Node> root);

  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace cellkit::model
