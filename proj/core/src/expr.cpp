#include "geoscope/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "geoscope/error.hpp"

namespace geoscope {

namespace {

constexpr std::array<std::pair<std::string_view, Function>, 9> kFunctions{{
    {"sin", Function::sin},
    {"cos", Function::cos},
    {"tan", Function::tan},
    {"exp", Function::exp},
    {"log", Function::log},
    {"sqrt", Function::sqrt},
    {"sinh", Function::sinh},
    {"cosh", Function::cosh},
    {"tanh", Function::tanh},
}};

Expr make(ExprNode node) { return Expr(std::make_shared<const ExprNode>(std::move(node))); }

}  // namespace

std::string_view function_name(Function fn) {
  for (const auto& [name, f] : kFunctions) {
    if (f == fn) return name;
  }
  return "?";
}

std::optional<Function> function_from_name(std::string_view name) {
  for (const auto& [n, f] : kFunctions) {
    if (n == name) return f;
  }
  return std::nullopt;
}

Expr Expr::number(double value, std::size_t offset) { return make({NumberNode{value}, offset}); }

Expr Expr::variable(int index, std::string name, std::size_t offset) {
  return make({VariableNode{index, std::move(name)}, offset});
}

Expr Expr::call(Function fn, Expr arg, std::size_t offset) {
  return make({CallNode{fn, std::move(arg)}, offset});
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs, std::size_t offset) {
  return make({BinaryNode{op, std::move(lhs), std::move(rhs)}, offset});
}

Expr Expr::negate(Expr operand, std::size_t offset) {
  return make({NegateNode{std::move(operand)}, offset});
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::div, a, b); }

bool Expr::is_constant() const {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberNode>) {
          return true;
        } else if constexpr (std::is_same_v<T, VariableNode>) {
          return false;
        } else if constexpr (std::is_same_v<T, CallNode>) {
          return n.arg.is_constant();
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          return n.lhs.is_constant() && n.rhs.is_constant();
        } else {
          return n.operand.is_constant();
        }
      },
      node_->data);
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  const auto& x = a.node_->data;
  const auto& y = b.node_->data;
  if (x.index() != y.index()) return false;
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        const auto& m = std::get<T>(y);
        if constexpr (std::is_same_v<T, NumberNode>) {
          return n.value == m.value;
        } else if constexpr (std::is_same_v<T, VariableNode>) {
          return n.index == m.index && n.name == m.name;
        } else if constexpr (std::is_same_v<T, CallNode>) {
          return n.fn == m.fn && n.arg == m.arg;
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          return n.op == m.op && n.lhs == m.lhs && n.rhs == m.rhs;
        } else {
          return n.operand == m.operand;
        }
      },
      x);
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> coords) : text_(text), coords_(coords) {}

  Expr parse() {
    skip_space();
    if (pos_ == text_.size()) fail("empty expression", {"number", "identifier", "'('", "'-'"});
    Expr e = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input", {"operator", "end of input"});
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what, std::vector<std::string> expected) const {
    std::ostringstream msg;
    msg << "syntax error at offset " << pos_ << ": " << what;
    if (!expected.empty()) {
      msg << " (expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) msg << (i ? ", " : "") << expected[i];
      msg << ")";
    }
    throw ParseError(msg.str(), pos_, std::move(expected));
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r' ||
                                   text_[pos_] == '\n')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      skip_space();
      const std::size_t at = pos_;
      if (accept('+')) {
        lhs = Expr::binary(BinaryOp::add, lhs, term(), at);
      } else if (accept('-')) {
        lhs = Expr::binary(BinaryOp::sub, lhs, term(), at);
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = factor();
    for (;;) {
      skip_space();
      const std::size_t at = pos_;
      if (accept('*')) {
        lhs = Expr::binary(BinaryOp::mul, lhs, factor(), at);
      } else if (accept('/')) {
        lhs = Expr::binary(BinaryOp::div, lhs, factor(), at);
      } else {
        return lhs;
      }
    }
  }

  Expr factor() {
    skip_space();
    const std::size_t at = pos_;
    if (accept('-')) return Expr::negate(factor(), at);
    Expr b = base();
    skip_space();
    const std::size_t caret = pos_;
    if (accept('^')) return Expr::binary(BinaryOp::pow, b, factor(), caret);
    return b;
  }

  Expr base() {
    skip_space();
    const std::size_t at = pos_;
    if (pos_ >= text_.size()) fail("unexpected end of input", {"number", "identifier", "'('", "'-'"});
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = expr();
      if (!accept(')')) fail("unbalanced parenthesis", {"')'"});
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
        ++end;
      }
      const std::string name(text_.substr(pos_, end - pos_));
      pos_ = end;
      for (std::size_t i = 0; i < coords_.size(); ++i) {
        if (coords_[i] == name) return Expr::variable(static_cast<int>(i), name, at);
      }
      if (const auto fn = function_from_name(name)) {
        if (!accept('(')) fail("function '" + name + "' requires an argument", {"'('"});
        Expr arg = expr();
        if (!accept(')')) fail("unbalanced parenthesis", {"')'"});
        return Expr::call(*fn, arg, at);
      }
      std::ostringstream msg;
      msg << "unknown identifier '" << name << "' at offset " << at;
      throw ParseError(msg.str(), at, {"coordinate name", "function name"});
    }
    fail(std::string("unexpected character '") + c + "'", {"number", "identifier", "'('", "'-'"});
  }

  Expr number() {
    const std::size_t at = pos_;
    std::size_t end = pos_;
    auto digits = [&] {
      while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
    };
    digits();
    if (end < text_.size() && text_[end] == '.') {
      ++end;
      digits();
    }
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t exp_end = end + 1;
      if (exp_end < text_.size() && (text_[exp_end] == '+' || text_[exp_end] == '-')) ++exp_end;
      if (exp_end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[exp_end]))) {
        end = exp_end;
        digits();
      }
    }
    double value = 0.0;
    const auto res = std::from_chars(text_.data() + at, text_.data() + end, value);
    if (res.ec != std::errc() || res.ptr != text_.data() + end) {
      pos_ = at;
      fail("malformed number", {"number"});
    }
    pos_ = end;
    return Expr::number(value, at);
  }

  std::string_view text_;
  std::span<const std::string> coords_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text, std::span<const std::string> coords) {
  return Parser(text, coords).parse();
}

std::string to_string(const Expr& e) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberNode>) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.17g", std::abs(n.value));
          return std::signbit(n.value) ? "(-" + std::string(buf) + ")" : std::string(buf);
        } else if constexpr (std::is_same_v<T, VariableNode>) {
          return n.name;
        } else if constexpr (std::is_same_v<T, CallNode>) {
          return std::string(function_name(n.fn)) + "(" + to_string(n.arg) + ")";
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          static constexpr char ops[] = {'+', '-', '*', '/', '^'};
          return "(" + to_string(n.lhs) + " " + ops[static_cast<int>(n.op)] + " " + to_string(n.rhs) + ")";
        } else {
          return "(-" + to_string(n.operand) + ")";
        }
      },
      e.node().data);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void rethrow_located(const DomainError& err, std::size_t offset) {
  std::ostringstream msg;
  msg << err.what() << " (expression offset " << offset << ")";
  throw DomainError(msg.str(), err.value());
}

// Scalar policies. The real ones replicate the jet value path exactly.
struct JetOps {
  using S = Jet;
  static S apply(Function fn, const S& a) {
    switch (fn) {
      case Function::sin: return sin(a);
      case Function::cos: return cos(a);
      case Function::tan: return tan(a);
      case Function::exp: return exp(a);
      case Function::log: return log(a);
      case Function::sqrt: return sqrt(a);
      case Function::sinh: return sinh(a);
      case Function::cosh: return cosh(a);
      case Function::tanh: return tanh(a);
    }
    return a;
  }
  static S div(const S& a, const S& b) { return a / b; }
  static S pow_const(const S& a, double r) { return pow(a, r); }
  static S pow_general(const S& a, const S& b) { return exp(b * log(a)); }
};

template <class T>
struct RealOps {
  using S = T;
  static void positive(const char* name, T v) {
    if (!(v > 0)) {
      std::ostringstream msg;
      msg << name << " requires a positive argument, got " << static_cast<double>(v);
      throw DomainError(msg.str(), static_cast<double>(v));
    }
  }
  static S apply(Function fn, S a) {
    switch (fn) {
      case Function::sin: return std::sin(a);
      case Function::cos: return std::cos(a);
      case Function::tan:
        if (std::cos(a) == 0) throw DomainError("tan evaluated at a pole", static_cast<double>(a));
        return std::tan(a);
      case Function::exp: return std::exp(a);
      case Function::log: positive("log", a); return std::log(a);
      case Function::sqrt: positive("sqrt", a); return std::sqrt(a);
      case Function::sinh: return std::sinh(a);
      case Function::cosh: return std::cosh(a);
      case Function::tanh: return std::tanh(a);
    }
    return a;
  }
  static S div(S a, S b) {
    if (b == 0) throw DomainError("division by a jet with zero constant term", 0.0);
    return a / b;
  }
  static S pow_const(S a, double r) {
    long n = 0;
    if (integral_exponent(r, n)) {
      if (n < 0 && a == 0) throw DomainError("negative power of zero", 0.0);
      return ipow(a, n);
    }
    positive("non-integer power", a);
    return std::pow(a, static_cast<S>(r));
  }
  static S pow_general(S a, S b) {
    positive("log", a);
    return std::exp(b * std::log(a));
  }
};

template <class Ops>
typename Ops::S eval_node(const Expr& e, std::span<const typename Ops::S> vars) {
  using S = typename Ops::S;
  const auto& node = e.node();
  return std::visit(
      [&](const auto& n) -> S {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberNode>) {
          return S(n.value);
        } else if constexpr (std::is_same_v<T, VariableNode>) {
          if (n.index < 0 || static_cast<std::size_t>(n.index) >= vars.size()) {
            throw ShapeError("coordinate '" + n.name + "' has no value at this point");
          }
          return vars[n.index];
        } else if constexpr (std::is_same_v<T, CallNode>) {
          const S arg = eval_node<Ops>(n.arg, vars);
          try {
            return Ops::apply(n.fn, arg);
          } catch (const DomainError& err) {
            rethrow_located(err, node.offset);
          }
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          if (n.op == BinaryOp::pow && n.rhs.is_constant()) {
            const S base = eval_node<Ops>(n.lhs, vars);
            const double r = evaluate_real(n.rhs, std::span<const double>{});
            try {
              return Ops::pow_const(base, r);
            } catch (const DomainError& err) {
              rethrow_located(err, node.offset);
            }
          }
          const S a = eval_node<Ops>(n.lhs, vars);
          const S b = eval_node<Ops>(n.rhs, vars);
          try {
            switch (n.op) {
              case BinaryOp::add: return a + b;
              case BinaryOp::sub: return a - b;
              case BinaryOp::mul: return a * b;
              case BinaryOp::div: return Ops::div(a, b);
              case BinaryOp::pow: return Ops::pow_general(a, b);
            }
          } catch (const DomainError& err) {
            rethrow_located(err, node.offset);
          }
          return a;
        } else {
          return -eval_node<Ops>(n.operand, vars);
        }
      },
      node.data);
}

}  // namespace

Jet evaluate(const Expr& e, std::span<const double> point, int order) {
  const int n = static_cast<int>(point.size());
  std::vector<Jet> vars;
  vars.reserve(n);
  for (int i = 0; i < n; ++i) vars.push_back(Jet::variable(i, point[i], n, order));
  Jet out = eval_node<JetOps>(e, std::span<const Jet>(vars));
  if (!out.has_layout()) out = Jet::constant(out.value(), n, order);
  return out;
}

double evaluate_real(const Expr& e, std::span<const double> point) {
  return eval_node<RealOps<double>>(e, point);
}

long double evaluate_real(const Expr& e, std::span<const long double> point) {
  return eval_node<RealOps<long double>>(e, point);
}

Expr substitute(const Expr& e, std::span<const Expr> replacement) {
  const auto& node = e.node();
  return std::visit(
      [&](const auto& n) -> Expr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberNode>) {
          return e;
        } else if constexpr (std::is_same_v<T, VariableNode>) {
          if (n.index < 0 || static_cast<std::size_t>(n.index) >= replacement.size()) {
            throw ShapeError("substitution does not cover coordinate '" + n.name + "'");
          }
          return replacement[n.index];
        } else if constexpr (std::is_same_v<T, CallNode>) {
          return Expr::call(n.fn, substitute(n.arg, replacement), node.offset);
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          return Expr::binary(n.op, substitute(n.lhs, replacement), substitute(n.rhs, replacement),
                              node.offset);
        } else {
          return Expr::negate(substitute(n.operand, replacement), node.offset);
        }
      },
      node.data);
}

}  // namespace geoscope
