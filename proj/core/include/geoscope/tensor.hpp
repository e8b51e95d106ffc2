#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "geoscope/error.hpp"
#include "geoscope/jet.hpp"

namespace geoscope {

enum class Variance : std::uint8_t { upper, lower };

/// Dense tensor at a point. Components are stored row-major with the first
/// slot most significant; every slot ranges over 0..dim-1.
template <class Scalar>
class BasicTensor {
 public:
  BasicTensor() = default;
  BasicTensor(int dim, std::vector<Variance> signature, const Scalar& fill = Scalar{})
      : dim_(dim), signature_(std::move(signature)) {
    std::size_t size = 1;
    strides_.assign(signature_.size(), 1);
    for (std::size_t s = signature_.size(); s-- > 0;) {
      strides_[s] = size;
      size *= static_cast<std::size_t>(dim_);
    }
    data_.assign(size, fill);
  }

  int dim() const noexcept { return dim_; }
  int rank() const noexcept { return static_cast<int>(signature_.size()); }
  const std::vector<Variance>& signature() const noexcept { return signature_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t stride(int slot) const { return strides_[slot]; }

  Scalar& operator[](std::size_t flat) { return data_[flat]; }
  const Scalar& operator[](std::size_t flat) const { return data_[flat]; }

  std::size_t flat_index(std::span<const int> idx) const {
    if (idx.size() != signature_.size()) throw ShapeError("tensor index has the wrong number of slots");
    std::size_t flat = 0;
    for (std::size_t s = 0; s < idx.size(); ++s) {
      if (idx[s] < 0 || idx[s] >= dim_) throw ShapeError("tensor index out of range");
      flat += strides_[s] * static_cast<std::size_t>(idx[s]);
    }
    return flat;
  }
  /// Component accessor by explicit index list.
  Scalar& operator()(std::initializer_list<int> idx) {
    return data_[flat_index(std::span<const int>(idx.begin(), idx.size()))];
  }
  const Scalar& operator()(std::initializer_list<int> idx) const {
    return data_[flat_index(std::span<const int>(idx.begin(), idx.size()))];
  }
  Scalar& at(std::span<const int> idx) { return data_[flat_index(idx)]; }
  const Scalar& at(std::span<const int> idx) const { return data_[flat_index(idx)]; }

  /// Digit of slot `s` in flat index `flat`.
  int digit(std::size_t flat, int s) const {
    return static_cast<int>((flat / strides_[s]) % static_cast<std::size_t>(dim_));
  }

  std::span<Scalar> data() noexcept { return data_; }
  std::span<const Scalar> data() const noexcept { return data_; }

 private:
  int dim_ = 0;
  std::vector<Variance> signature_;
  std::vector<std::size_t> strides_;
  std::vector<Scalar> data_;
};

using Tensor = BasicTensor<double>;
using JetTensor = BasicTensor<Jet>;

/// Value slots of a jet-valued tensor.
Tensor values(const JetTensor& t);
/// Truncates every component to `order`.
JetTensor truncated(const JetTensor& t, int order);

inline std::vector<Variance> lower_slots(int count) { return std::vector<Variance>(count, Variance::lower); }

/// Metric contraction of slots i and j. Two lower slots contract with g_inv,
/// two upper slots with g, mixed slots by plain trace.
template <class Scalar>
BasicTensor<Scalar> contract(const BasicTensor<Scalar>& t, int i, int j, const BasicTensor<Scalar>& g,
                             const BasicTensor<Scalar>& g_inv) {
  const int r = t.rank();
  if (i == j || i < 0 || j < 0 || i >= r || j >= r) throw ShapeError("contraction slots out of range");
  if (i > j) std::swap(i, j);
  const int n = t.dim();
  std::vector<Variance> sig;
  for (int s = 0; s < r; ++s) {
    if (s != i && s != j) sig.push_back(t.signature()[s]);
  }
  const Variance vi = t.signature()[i];
  const Variance vj = t.signature()[j];
  BasicTensor<Scalar> out(n, sig);
  std::vector<int> idx(r, 0);
  for (std::size_t f = 0; f < out.size(); ++f) {
    for (int s = 0, o = 0; s < r; ++s) {
      if (s == i || s == j) continue;
      idx[s] = out.digit(f, o++);
    }
    Scalar acc{};
    for (int a = 0; a < n; ++a) {
      idx[i] = a;
      if (vi != vj) {
        idx[j] = a;
        acc += t.at(idx);
        continue;
      }
      const auto& weight = vi == Variance::lower ? g_inv : g;
      for (int b = 0; b < n; ++b) {
        idx[j] = b;
        acc += weight({a, b}) * t.at(idx);
      }
    }
    out[f] = acc;
  }
  return out;
}

}  // namespace geoscope
