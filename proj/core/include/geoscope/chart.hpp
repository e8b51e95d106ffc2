#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geoscope/expr.hpp"

namespace geoscope {

/// Open interval (lo, hi); either end may be infinite.
struct Interval {
  double lo;
  double hi;
  bool contains(double x) const { return x > lo && x < hi; }
};

/// A coordinate domain carrying symbolic metric components.
///
/// Chart files are line oriented:
///
///   dim = 2
///   coords = th ph
///   g 0 0 = 1
///   g 1 1 = sin(th)^2
///   domain th = (0, 3.141592653589793)
///
/// '#' starts a comment and blank lines are ignored. Metric entries use
/// 0-based indices with i <= j; (j, i) mirrors (i, j) and omitted entries are 0.
class Chart {
 public:
  Chart(std::vector<std::string> coords, std::vector<Expr> upper_metric,
        std::vector<std::optional<Interval>> domain = {});

  static Chart parse(std::string_view text, const std::string& source = "<string>");
  static Chart load(const std::filesystem::path& path);

  int dim() const noexcept { return static_cast<int>(coords_.size()); }
  const std::vector<std::string>& coords() const noexcept { return coords_; }
  /// Metric component (i, j); symmetric.
  const Expr& metric(int i, int j) const { return metric_[i * dim() + j]; }
  const std::optional<Interval>& domain(int i) const { return domain_[i]; }

  /// True when every coordinate lies inside its domain hint.
  bool in_domain(std::span<const double> point) const;

 private:
  std::vector<std::string> coords_;
  std::vector<Expr> metric_;  // dim x dim, row-major, mirrored
  std::vector<std::optional<Interval>> domain_;
};

}  // namespace geoscope
