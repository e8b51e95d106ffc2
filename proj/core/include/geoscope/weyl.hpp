#pragma once

#include <compare>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geoscope/chart.hpp"
#include "geoscope/linalg.hpp"
#include "geoscope/tensor.hpp"

namespace geoscope {

/// A complete metric trace of the product of curvature derivatives
/// nabla^{m_1} R (x) ... (x) nabla^{m_l} R.
///
/// Factor i occupies consecutive global slots starting at the sum of
/// (m_k + 4) over earlier factors: its m_i derivative slots, then the four
/// curvature slots. `pairing` is a perfect matching on all slots.
struct TracePattern {
  std::vector<int> factors;                  // non-decreasing derivative orders
  std::vector<std::pair<int, int>> pairing;  // each pair (a, b) with a < b, pairs sorted

  /// Total number of covariant derivatives, sum of m_i.
  int order() const;
  int valence() const;
  /// Stable report name, e.g. "tr[0 | (0,2)(1,3)]".
  std::string descriptor() const;

  friend bool operator==(const TracePattern&, const TracePattern&) = default;
  friend auto operator<=>(const TracePattern&, const TracePattern&) = default;
};

struct InvariantSet {
  std::vector<TracePattern> patterns;
  int max_order = 0;
  int max_valence = 0;
};

inline constexpr int kDefaultMaxValence = 8;
/// n(n-1)/2 capped at 4.
int default_max_order(int dim);

/// Lexicographically minimal representative under permutations of equal
/// factors and the pair symmetries of each curvature block. Throws
/// ShapeError when the pairing is not a perfect matching.
TracePattern canonicalize(const TracePattern& p);

/// True when the pairing traces one antisymmetric pair of a curvature block.
bool vanishes_identically(const TracePattern& p);

/// All canonical, not identically vanishing patterns with order <= max_order
/// and valence <= max_valence, sorted by (order, valence, factors, pairing).
InvariantSet enumerate_patterns(int dim, int max_order, int max_valence = kDefaultMaxValence);

/// Full contraction of the pattern on a numeric tower. Throws ShapeError if
/// the tower is too short.
double evaluate_invariant(const TracePattern& p, std::span<const Tensor> tower, const Tensor& g_inv);
/// Same contraction on a jet-valued tower.
Jet evaluate_invariant(const TracePattern& p, std::span<const JetTensor> tower, const JetTensor& g_inv);

/// Values of every pattern at a point.
std::vector<double> invariant_values(const InvariantSet& set, const Chart& chart, std::span<const double> point);

/// Coordinate differential of the invariant at a point.
std::vector<double> invariant_gradient(const TracePattern& p, const Chart& chart, std::span<const double> point);
/// One gradient row per pattern, sharing one jet tower.
Eigen::MatrixXd invariant_gradients(const InvariantSet& set, const Chart& chart, std::span<const double> point);

struct CohomogeneityResult {
  int codim = 0;          // rank of the gradient matrix at the point
  int generic_codim = 0;  // largest rank among the point and its probes
  std::vector<TracePattern> rank_basis;
  bool singular = false;  // rank differs at some probe point
  std::vector<double> singular_values;
};

inline constexpr double kDefaultProbeStep = 1e-3;

/// Codimension of the level sets of the invariants through `point`; probes
/// the 2n points point +- h_probe e_i to flag non-regular points.
CohomogeneityResult cohomogeneity_at(const Chart& chart, std::span<const double> point, const InvariantSet& set,
                                     double rank_tol = kDefaultRankTol, double h_probe = kDefaultProbeStep);

}  // namespace geoscope
