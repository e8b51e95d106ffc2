#include "geoscope/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "geoscope/error.hpp"

namespace geoscope {

namespace {

// All multi-indices of length `dim` with total degree exactly `degree`, in
// lexicographically descending order of the leading exponent.
void append_degree(int dim, int degree, std::vector<MultiIndex>& out) {
  MultiIndex alpha(dim, 0);
  auto rec = [&](auto&& self, int slot, int remaining) -> void {
    if (slot == dim - 1) {
      alpha[slot] = remaining;
      out.push_back(alpha);
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      alpha[slot] = e;
      self(self, slot + 1, remaining - e);
    }
  };
  rec(rec, 0, degree);
}

int degree_of(std::span<const int> alpha) {
  int d = 0;
  for (int e : alpha) d += e;
  return d;
}

}  // namespace

JetLayout::JetLayout(int dim, int order) : dim_(dim), order_(order) {
  degree_end_.resize(order + 1);
  for (int d = 0; d <= order; ++d) {
    append_degree(dim, d, indices_);
    degree_end_[d] = indices_.size();
  }

  std::map<MultiIndex, std::uint32_t> position;
  for (std::size_t k = 0; k < indices_.size(); ++k) position.emplace(indices_[k], k);

  std::vector<std::vector<Product>> by_out(indices_.size());
  MultiIndex sum(dim);
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    const int di = degree_of(indices_[i]);
    for (std::size_t j = 0; j < degree_end_[order - di]; ++j) {
      for (int v = 0; v < dim; ++v) sum[v] = indices_[i][v] + indices_[j][v];
      const auto k = position.at(sum);
      by_out[k].push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), k});
    }
  }
  product_offsets_.push_back(0);
  for (auto& group : by_out) {
    products_.insert(products_.end(), group.begin(), group.end());
    product_offsets_.push_back(static_cast<std::uint32_t>(products_.size()));
  }

  shifts_.resize(dim);
  if (order > 0) {
    for (int v = 0; v < dim; ++v) {
      shifts_[v].reserve(degree_end_[order - 1]);
      for (std::size_t k = 0; k < degree_end_[order - 1]; ++k) {
        MultiIndex up = indices_[k];
        ++up[v];
        shifts_[v].push_back(position.at(up));
      }
    }
  }
}

const JetLayout& JetLayout::get(int dim, int order) {
  if (dim < 1 || order < 0) {
    throw ShapeError("jet layout requires dim >= 1 and order >= 0");
  }
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<const JetLayout>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{dim, order}];
  if (!slot) slot.reset(new JetLayout(dim, order));
  return *slot;
}

long JetLayout::find(std::span<const int> alpha) const {
  if (static_cast<int>(alpha.size()) != dim_) {
    throw ShapeError("multi-index length does not match jet dimension");
  }
  const int d = degree_of(alpha);
  if (d > order_) return -1;
  const std::size_t begin = d == 0 ? 0 : degree_end_[d - 1];
  for (std::size_t k = begin; k < degree_end_[d]; ++k) {
    if (std::equal(alpha.begin(), alpha.end(), indices_[k].begin())) return static_cast<long>(k);
  }
  return -1;
}

Jet Jet::constant(double c, int dim, int order) {
  const auto& layout = JetLayout::get(dim, order);
  std::vector<double> coeffs(layout.size(), 0.0);
  coeffs[0] = c;
  return Jet(&layout, std::move(coeffs));
}

Jet Jet::variable(int i, double x0, int dim, int order) {
  if (i < 0 || i >= dim) {
    std::ostringstream msg;
    msg << "coordinate index " << i << " out of range for dimension " << dim;
    throw ShapeError(msg.str());
  }
  Jet jet = constant(x0, dim, order);
  if (order >= 1) jet.coeffs_[1 + i] = 1.0;
  return jet;
}

double Jet::coefficient(std::span<const int> alpha) const {
  if (!layout_) return degree_of(alpha) == 0 ? coeffs_[0] : 0.0;
  const long k = layout_->find(alpha);
  return k < 0 ? 0.0 : coeffs_[k];
}

double Jet::partial(std::span<const int> alpha) const {
  double factorial = 1.0;
  for (int e : alpha) {
    for (int m = 2; m <= e; ++m) factorial *= m;
  }
  return coefficient(alpha) * factorial;
}

std::vector<double> Jet::gradient() const {
  std::vector<double> grad(dim(), 0.0);
  if (layout_ && layout_->order() >= 1) {
    for (int i = 0; i < dim(); ++i) grad[i] = coeffs_[1 + i];
  }
  return grad;
}

Jet Jet::derivative(int var) const {
  if (!layout_) return Jet(0.0);
  if (var < 0 || var >= dim()) throw ShapeError("derivative variable out of range");
  if (order() == 0) throw ShapeError("cannot differentiate an order-0 jet");
  const auto& lower = JetLayout::get(dim(), order() - 1);
  const auto& shift = layout_->shift(var);
  std::vector<double> out(lower.size());
  for (std::size_t k = 0; k < lower.size(); ++k) {
    const auto src = shift[k];
    out[k] = coeffs_[src] * layout_->index(src)[var];
  }
  return Jet(&lower, std::move(out));
}

Jet Jet::truncated(int new_order) const {
  if (!layout_ || new_order >= order()) return *this;
  if (new_order < 0) throw ShapeError("negative truncation order");
  const auto& lower = JetLayout::get(dim(), new_order);
  return Jet(&lower, std::vector<double>(coeffs_.begin(), coeffs_.begin() + lower.size()));
}

const JetLayout* Jet::common(const Jet& a, const Jet& b) {
  if (!a.layout_) return b.layout_;
  if (!b.layout_ || a.layout_ == b.layout_) return a.layout_;
  std::ostringstream msg;
  msg << "jet shape mismatch: (dim " << a.dim() << ", order " << a.order() << ") vs (dim "
      << b.dim() << ", order " << b.order() << ")";
  throw ShapeError(msg.str());
}

Jet Jet::promoted(const JetLayout* layout) const {
  if (layout_ == layout || !layout) return *this;
  std::vector<double> coeffs(layout->size(), 0.0);
  coeffs[0] = coeffs_[0];
  return Jet(layout, std::move(coeffs));
}

Jet& Jet::operator+=(const Jet& rhs) {
  const auto* layout = common(*this, rhs);
  if (layout_ != layout) *this = promoted(layout);
  if (rhs.layout_) {
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += rhs.coeffs_[k];
  } else {
    coeffs_[0] += rhs.coeffs_[0];
  }
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
  const auto* layout = common(*this, rhs);
  if (layout_ != layout) *this = promoted(layout);
  if (rhs.layout_) {
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= rhs.coeffs_[k];
  } else {
    coeffs_[0] -= rhs.coeffs_[0];
  }
  return *this;
}

Jet& Jet::operator*=(const Jet& rhs) { return *this = *this * rhs; }
Jet& Jet::operator/=(const Jet& rhs) { return *this = *this / rhs; }

Jet operator-(Jet a) {
  for (auto& c : a.coeffs_) c = -c;
  return a;
}

Jet operator*(const Jet& a, const Jet& b) {
  const auto* layout = Jet::common(a, b);
  if (!a.layout_ || !b.layout_) {
    const double s = a.layout_ ? b.coeffs_[0] : a.coeffs_[0];
    Jet out = a.layout_ ? a : b;
    for (auto& c : out.coeffs_) c *= s;
    return out;
  }
  std::vector<double> out(layout->size(), 0.0);
  for (const auto& p : layout->products()) out[p.out] += a.coeffs_[p.lhs] * b.coeffs_[p.rhs];
  return Jet(layout, std::move(out));
}

Jet operator/(const Jet& a, const Jet& b) {
  const double b0 = b.coeffs_[0];
  if (b0 == 0.0) throw DomainError("division by a jet with zero constant term", b0);
  const auto* layout = Jet::common(a, b);
  if (!b.layout_) {
    Jet out = a;
    for (auto& c : out.coeffs_) c /= b0;
    return out;
  }
  const Jet num = a.promoted(layout);
  std::vector<double> out(layout->size(), 0.0);
  const auto& products = layout->products();
  const auto& offsets = layout->product_offsets();
  // Solve (out * b)[k] = num[k] in graded order; every product feeding k with
  // rhs != 0 involves an out coefficient of strictly lower degree.
  for (std::size_t k = 0; k < out.size(); ++k) {
    double acc = num.coeffs_[k];
    for (auto p = offsets[k]; p < offsets[k + 1]; ++p) {
      const auto& prod = products[p];
      if (prod.rhs != 0) acc -= out[prod.lhs] * b.coeffs_[prod.rhs];
    }
    out[k] = acc / b0;
  }
  return Jet(layout, std::move(out));
}

Jet compose_series(const Jet& a, std::span<const double> series) {
  if (!a.layout_) return Jet(series[0]);
  Jet h = a;
  h.coeffs_[0] = 0.0;
  const int K = a.order();
  Jet acc = Jet::constant(series[K], a.dim(), K);
  for (int k = K - 1; k >= 0; --k) {
    acc = acc * h;
    acc.coeffs_[0] += series[k];
  }
  return acc;
}

namespace {

using Series = std::vector<double>;

// Univariate truncated series division q = n / d.
Series divide(const Series& n, const Series& d) {
  Series q(n.size(), 0.0);
  for (std::size_t k = 0; k < n.size(); ++k) {
    double acc = n[k];
    for (std::size_t j = 1; j <= k; ++j) acc -= q[k - j] * d[j];
    q[k] = acc / d[0];
  }
  return q;
}

Series trig_series(double a0, int K, bool cosine) {
  const double s = std::sin(a0);
  const double c = std::cos(a0);
  // Derivative cycle of sin: sin, cos, -sin, -cos.
  const double cycle_sin[4] = {s, c, -s, -c};
  const double cycle_cos[4] = {c, -s, -c, s};
  Series out(K + 1);
  double fact = 1.0;
  for (int k = 0; k <= K; ++k) {
    if (k > 0) fact *= k;
    out[k] = (cosine ? cycle_cos[k % 4] : cycle_sin[k % 4]) / fact;
  }
  return out;
}

Series hyperbolic_series(double a0, int K, bool cosh_series) {
  const double s = std::sinh(a0);
  const double c = std::cosh(a0);
  Series out(K + 1);
  double fact = 1.0;
  for (int k = 0; k <= K; ++k) {
    if (k > 0) fact *= k;
    const bool even = k % 2 == 0;
    out[k] = (cosh_series ? (even ? c : s) : (even ? s : c)) / fact;
  }
  return out;
}

Series power_series(double a0, double r, int K) {
  Series out(K + 1);
  out[0] = std::pow(a0, r);
  double binom = 1.0;
  for (int k = 1; k <= K; ++k) {
    binom *= (r - (k - 1)) / k;
    out[k] = out[0] * binom / ipow(a0, k);
  }
  return out;
}

void require_positive(const char* name, double value) {
  if (!(value > 0.0)) {
    std::ostringstream msg;
    msg << name << " requires a positive argument, got " << value;
    throw DomainError(msg.str(), value);
  }
}

}  // namespace

Jet exp(const Jet& a) {
  const int K = a.order();
  Series s(K + 1);
  s[0] = std::exp(a.value());
  for (int k = 1; k <= K; ++k) s[k] = s[k - 1] / k;
  return compose_series(a, s);
}

Jet log(const Jet& a) {
  const double a0 = a.value();
  require_positive("log", a0);
  const int K = a.order();
  Series s(K + 1);
  s[0] = std::log(a0);
  double p = 1.0;
  for (int k = 1; k <= K; ++k) {
    p *= a0;
    s[k] = (k % 2 == 1 ? 1.0 : -1.0) / (k * p);
  }
  return compose_series(a, s);
}

Jet sin(const Jet& a) { return compose_series(a, trig_series(a.value(), a.order(), false)); }
Jet cos(const Jet& a) { return compose_series(a, trig_series(a.value(), a.order(), true)); }

Jet tan(const Jet& a) {
  const double a0 = a.value();
  if (std::cos(a0) == 0.0) throw DomainError("tan evaluated at a pole", a0);
  const int K = a.order();
  Series s = divide(trig_series(a0, K, false), trig_series(a0, K, true));
  s[0] = std::tan(a0);
  return compose_series(a, s);
}

Jet sinh(const Jet& a) { return compose_series(a, hyperbolic_series(a.value(), a.order(), false)); }
Jet cosh(const Jet& a) { return compose_series(a, hyperbolic_series(a.value(), a.order(), true)); }

Jet tanh(const Jet& a) {
  const int K = a.order();
  Series s = divide(hyperbolic_series(a.value(), K, false), hyperbolic_series(a.value(), K, true));
  s[0] = std::tanh(a.value());
  return compose_series(a, s);
}

Jet sqrt(const Jet& a) {
  const double a0 = a.value();
  require_positive("sqrt", a0);
  Series s = power_series(a0, 0.5, a.order());
  s[0] = std::sqrt(a0);
  return compose_series(a, s);
}

Jet powi(const Jet& a, long exponent) {
  if (exponent < 0) {
    if (a.value() == 0.0) throw DomainError("negative power of zero", 0.0);
    return Jet(1.0) / powi(a, -exponent);
  }
  Jet result = a.has_layout() ? Jet::constant(1.0, a.dim(), a.order()) : Jet(1.0);
  Jet base = a;
  bool first = true;
  while (exponent > 0) {
    if (exponent & 1) {
      result = first ? base : result * base;
      first = false;
    }
    exponent >>= 1;
    if (exponent > 0) base = base * base;
  }
  return result;
}

Jet pow(const Jet& a, double exponent) {
  long n = 0;
  if (integral_exponent(exponent, n)) return powi(a, n);
  require_positive("non-integer power", a.value());
  return compose_series(a, power_series(a.value(), exponent, a.order()));
}

namespace {
template <class T>
T ipow_impl(T base, long exponent) {
  if (exponent < 0) return T(1) / ipow_impl(base, -exponent);
  T result = 1;
  bool first = true;
  while (exponent > 0) {
    if (exponent & 1) {
      result = first ? base : result * base;
      first = false;
    }
    exponent >>= 1;
    if (exponent > 0) base = base * base;
  }
  return result;
}
}  // namespace

double ipow(double base, long exponent) { return ipow_impl(base, exponent); }
long double ipow(long double base, long exponent) { return ipow_impl(base, exponent); }

bool integral_exponent(double r, long& out) {
  if (std::isfinite(r) && std::abs(r) < 1e9 && r == std::trunc(r)) {
    out = static_cast<long>(r);
    return true;
  }
  return false;
}

}  // namespace geoscope
