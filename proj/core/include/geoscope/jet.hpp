#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace geoscope {

using MultiIndex = std::vector<int>;

/// Index tables shared by all jets of a given (dim, order). Multi-indices are
/// stored in graded lexicographic order, so the table of a lower order is a
/// prefix of the table of a higher order.
class JetLayout {
 public:
  static const JetLayout& get(int dim, int order);

  int dim() const noexcept { return dim_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return indices_.size(); }
  const MultiIndex& index(std::size_t k) const { return indices_[k]; }
  /// Position of `alpha` in the table, or -1 if its degree exceeds the order.
  long find(std::span<const int> alpha) const;
  /// Number of coefficients of total degree <= `degree`.
  std::size_t prefix_size(int degree) const { return degree_end_[degree]; }

  struct Product {
    std::uint32_t lhs, rhs, out;
  };
  /// All (lhs, rhs) index pairs whose sum stays within the order, sorted by `out`.
  const std::vector<Product>& products() const noexcept { return products_; }
  /// Offsets into products(): entries for output k lie in [offsets[k], offsets[k+1]).
  const std::vector<std::uint32_t>& product_offsets() const noexcept { return product_offsets_; }
  /// For coefficient k of the order-1-lower table, the position of index(k) + e_var here.
  const std::vector<std::uint32_t>& shift(int var) const { return shifts_[var]; }

 private:
  JetLayout(int dim, int order);

  int dim_;
  int order_;
  std::vector<MultiIndex> indices_;
  std::vector<std::size_t> degree_end_;
  std::vector<Product> products_;
  std::vector<std::uint32_t> product_offsets_;
  std::vector<std::vector<std::uint32_t>> shifts_;
};

/// Truncated multivariate Taylor expansion of a scalar function at a point.
///
/// Coefficients are Taylor coefficients (the partial derivative divided by the
/// multi-index factorial). A default-constructed jet, or one built from a bare
/// double, carries no layout and behaves as a constant in mixed arithmetic.
class Jet {
 public:
  Jet() : coeffs_{0.0} {}
  Jet(double c) : coeffs_{c} {}  // NOLINT(google-explicit-constructor)

  static Jet constant(double c, int dim, int order);
  static Jet variable(int i, double x0, int dim, int order);

  bool has_layout() const noexcept { return layout_ != nullptr; }
  int dim() const noexcept { return layout_ ? layout_->dim() : 0; }
  int order() const noexcept { return layout_ ? layout_->order() : 0; }
  const JetLayout* layout() const noexcept { return layout_; }

  double value() const noexcept { return coeffs_[0]; }
  std::span<const double> coefficients() const noexcept { return coeffs_; }
  std::span<double> coefficients() noexcept { return coeffs_; }

  /// Taylor coefficient of x^alpha; zero past the truncation order.
  double coefficient(std::span<const int> alpha) const;
  /// Raw partial derivative d^alpha f.
  double partial(std::span<const int> alpha) const;
  /// First partials (the degree-one coefficients).
  std::vector<double> gradient() const;

  /// Partial derivative with respect to coordinate `var`; order drops by one.
  Jet derivative(int var) const;
  /// Discards every coefficient of degree above `order`.
  Jet truncated(int order) const;

  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator*=(const Jet& rhs);
  Jet& operator/=(const Jet& rhs);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator-(Jet a);

 private:
  Jet(const JetLayout* layout, std::vector<double> coeffs)
      : layout_(layout), coeffs_(std::move(coeffs)) {}

  /// Resolves the common layout of two operands, throwing on mismatch.
  static const JetLayout* common(const Jet& a, const Jet& b);
  Jet promoted(const JetLayout* layout) const;

  friend Jet compose_series(const Jet& a, std::span<const double> series);

  const JetLayout* layout_ = nullptr;
  std::vector<double> coeffs_;
};

/// Evaluates sum_k series[k] * (a - a.value())^k, truncated at a's order.
Jet compose_series(const Jet& a, std::span<const double> series);

Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet tan(const Jet& a);
Jet sinh(const Jet& a);
Jet cosh(const Jet& a);
Jet tanh(const Jet& a);
Jet sqrt(const Jet& a);
/// Integer powers by repeated squaring; exact on polynomials.
Jet powi(const Jet& a, long exponent);
/// Real powers. Integral exponents take the exact path; any other exponent
/// requires a positive base.
Jet pow(const Jet& a, double exponent);

/// Repeated-squaring power shared by real and jet evaluation so both agree bit for bit.
double ipow(double base, long exponent);
long double ipow(long double base, long exponent);

/// Returns true and sets `out` when `r` is an integer of moderate size.
bool integral_exponent(double r, long& out);

}  // namespace geoscope
