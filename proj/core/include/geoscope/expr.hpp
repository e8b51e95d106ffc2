#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "geoscope/jet.hpp"

namespace geoscope {

enum class Function { sin, cos, tan, exp, log, sqrt, sinh, cosh, tanh };
enum class BinaryOp { add, sub, mul, div, pow };

std::string_view function_name(Function fn);
std::optional<Function> function_from_name(std::string_view name);

struct ExprNode;

/// Immutable expression tree over chart coordinates. Copies share structure.
class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}

  static Expr number(double value, std::size_t offset = 0);
  static Expr variable(int index, std::string name, std::size_t offset = 0);
  static Expr call(Function fn, Expr arg, std::size_t offset = 0);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs, std::size_t offset = 0);
  static Expr negate(Expr operand, std::size_t offset = 0);

  const ExprNode& node() const { return *node_; }
  bool empty() const noexcept { return node_ == nullptr; }

  /// True when the tree references no coordinate.
  bool is_constant() const;

  /// Structural equality; source offsets are ignored.
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  std::shared_ptr<const ExprNode> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);

struct NumberNode {
  double value;
};
struct VariableNode {
  int index;
  std::string name;
};
struct CallNode {
  Function fn;
  Expr arg;
};
struct BinaryNode {
  BinaryOp op;
  Expr lhs;
  Expr rhs;
};
struct NegateNode {
  Expr operand;
};

struct ExprNode {
  std::variant<NumberNode, VariableNode, CallNode, BinaryNode, NegateNode> data;
  std::size_t offset = 0;  // byte offset in the source text
};

/// Parses `text` against the grammar
///
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := '-' factor | base ('^' factor)?
///   base   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
///
/// Identifiers resolve to coordinates (by position in `coords`) or to one of
/// the elementary functions. Throws ParseError on malformed input or an
/// unknown identifier.
Expr parse_expression(std::string_view text, std::span<const std::string> coords);

/// Fully parenthesized rendering; parse(print(e)) reproduces e.
std::string to_string(const Expr& e);

/// Jet of the expression at `point`, truncated at `order`. Domain violations
/// are rethrown as DomainError naming the offending node's source offset.
Jet evaluate(const Expr& e, std::span<const double> point, int order);

/// Plain real evaluation, following the same operation sequence as the jet
/// value slot.
double evaluate_real(const Expr& e, std::span<const double> point);
long double evaluate_real(const Expr& e, std::span<const long double> point);

/// Replaces every coordinate reference i by `replacement[i]`.
Expr substitute(const Expr& e, std::span<const Expr> replacement);

}  // namespace geoscope
