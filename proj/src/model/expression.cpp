#include "cellkit/model/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "cellkit/errors.hpp"

namespace cellkit::model {

namespace {

enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Call };
enum class Fn { Exp, Log, Sqrt, Sinh, Cosh, Tanh, Atan, Sin, Cos, Abs };

}  // namespace

struct Expression::Node {
  Op op = Op::Const;
  Fn fn = Fn::Exp;
  double value = 0.0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr run() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + std::string(s_) + "': " + what + " at column " +
                      std::to_string(pos_ + 1));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    auto n = term();
    for (;;) {
      if (accept('+')) {
        n = make(Op::Add, n, term());
      } else if (accept('-')) {
        n = make(Op::Sub, n, term());
      } else {
        return n;
      }
    }
  }

  NodePtr term() {
    auto n = unary();
    for (;;) {
      if (accept('*')) {
        n = make(Op::Mul, n, unary());
      } else if (accept('/')) {
        n = make(Op::Div, n, unary());
      } else {
        return n;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  // right associative: a^b^c = a^(b^c)
  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Op::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (accept('(')) {
      auto n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const std::string rest(s_.substr(pos_));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ += used;
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    const std::string name(s_.substr(start, pos_ - start));
    if (name == "x") return make(Op::Var);
    if (name == "pi") {
      auto n = std::make_shared<Expression::Node>();
      n->value = std::numbers::pi;
      return n;
    }
    static const std::pair<const char*, Fn> table[] = {
        {"exp", Fn::Exp},   {"log", Fn::Log},   {"ln", Fn::Log},   {"sqrt", Fn::Sqrt},
        {"sinh", Fn::Sinh}, {"cosh", Fn::Cosh}, {"tanh", Fn::Tanh}, {"atan", Fn::Atan},
        {"sin", Fn::Sin},   {"cos", Fn::Cos},   {"abs", Fn::Abs}};
    for (const auto& [fname, fn] : table) {
      if (name == fname) {
        if (!accept('(')) fail("expected '(' after " + name);
        auto arg = expr();
        if (!accept(')')) fail("expected ')'");
        auto n = std::make_shared<Expression::Node>();
        n->op = Op::Call;
        n->fn = fn;
        n->lhs = arg;
        return n;
      }
    }
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

Dual eval(const Expression::Node& n, double x) {
  switch (n.op) {
    case Op::Const:
      return {n.value, 0.0};
    case Op::Var:
      return {x, 1.0};
    case Op::Neg: {
      const Dual a = eval(*n.lhs, x);
      return {-a.value, -a.deriv};
    }
    case Op::Add: {
      const Dual a = eval(*n.lhs, x), b = eval(*n.rhs, x);
      return {a.value + b.value, a.deriv + b.deriv};
    }
    case Op::Sub: {
      const Dual a = eval(*n.lhs, x), b = eval(*n.rhs, x);
      return {a.value - b.value, a.deriv - b.deriv};
    }
    case Op::Mul: {
      const Dual a = eval(*n.lhs, x), b = eval(*n.rhs, x);
      return {a.value * b.value, a.deriv * b.value + a.value * b.deriv};
    }
    case Op::Div: {
      const Dual a = eval(*n.lhs, x), b = eval(*n.rhs, x);
      return {a.value / b.value, (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value)};
    }
    case Op::Pow: {
      const Dual a = eval(*n.lhs, x), b = eval(*n.rhs, x);
      const double v = std::pow(a.value, b.value);
      double d = 0.0;
      if (b.deriv == 0.0) {
        d = (a.value == 0.0 && b.value == 0.0) ? 0.0 : b.value * std::pow(a.value, b.value - 1.0) * a.deriv;
      } else {
        d = v * (b.deriv * std::log(a.value) + b.value * a.deriv / a.value);
      }
      return {v, d};
    }
    case Op::Call: {
      const Dual a = eval(*n.lhs, x);
      switch (n.fn) {
        case Fn::Exp: {
          const double e = std::exp(a.value);
          return {e, e * a.deriv};
        }
        case Fn::Log:
          return {std::log(a.value), a.deriv / a.value};
        case Fn::Sqrt: {
          const double r = std::sqrt(a.value);
          return {r, 0.5 * a.deriv / r};
        }
        case Fn::Sinh:
          return {std::sinh(a.value), std::cosh(a.value) * a.deriv};
        case Fn::Cosh:
          return {std::cosh(a.value), std::sinh(a.value) * a.deriv};
        case Fn::Tanh: {
          const double t = std::tanh(a.value);
          return {t, (1.0 - t * t) * a.deriv};
        }
        case Fn::Atan:
          return {std::atan(a.value), a.deriv / (1.0 + a.value * a.value)};
        case Fn::Sin:
          return {std::sin(a.value), std::cos(a.value) * a.deriv};
        case Fn::Cos:
          return {std::cos(a.value), -std::sin(a.value) * a.deriv};
        case Fn::Abs:
          return {std::abs(a.value), (a.value < 0.0 ? -1.0 : 1.0) * a.deriv};
      }
    }
  }
  return {};
}

}  // namespace

Expression::Expression(std::string text, std::shared_ptr<const Node> root)
    : text_(std::move(text)), root_(std::move(root)) {}

Expression Expression::parse(std::string_view text) {
  Parser p(text);
  auto root = p.run();
  return Expression(std::string(text), std::move(root));
}

Dual Expression::evaluate(double x) const { return eval(*root_, x); }

}  // namespace cellkit::model
