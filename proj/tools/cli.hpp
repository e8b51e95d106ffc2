#pragma once

#include <exception>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geoscope/chart.hpp"
#include "geoscope/error.hpp"
#include "geoscope/extension.hpp"
#include "geoscope/linalg.hpp"
#include "geoscope/weyl.hpp"

namespace geoscope::cli {

/// Bad command-line input that is not a chart or expression error.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::optional<int> max_order;    // default_max_order(n)
  int max_valence = kDefaultMaxValence;
  std::optional<int> tower_depth;  // stabilization_cap(n) + 1
  double rank_tol = kDefaultRankTol;
  int steps = 100;
  int jobs = 1;
  double probe_step = kDefaultProbeStep;
  double check_step = 1e-3;
};

/// "1.0,0" -> {1.0, 0.0}; the count must equal `dim`.
std::vector<double> parse_point(std::string_view text, int dim);

/// "[-1,1]x[-1,1]:9x9" -> two axes with 9 nodes each.
Grid parse_grid(std::string_view text, int dim);

/// JSON report for one point.
std::string analyze(const Chart& chart, const std::string& chart_path, std::span<const double> point,
                    const Options& opts);

/// CSV with one row per grid node, in grid order.
std::string scan(const Chart& chart, const std::string& chart_path, const Grid& grid, const std::string& grid_text,
                 const Options& opts);

struct ExtendOutput {
  std::string summary;  // JSON
  std::string csv;
};

ExtendOutput extend(const Chart& chart, const std::string& chart_path, std::span<const double> base, int element,
                    const Grid& grid, const std::string& grid_text, const Options& opts);

/// 1 for input errors, 2 for numerical failures.
int exit_code_for(const std::exception& e);

}  // namespace geoscope::cli
