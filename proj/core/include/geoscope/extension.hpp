#pragma once

#include <Eigen/Dense>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "geoscope/chart.hpp"
#include "geoscope/kostant.hpp"
#include "geoscope/weyl.hpp"

namespace geoscope {

struct GridAxis {
  double min;
  double max;
  int count;

  double node(int i) const { return count == 1 ? min : min + (max - min) * i / (count - 1); }
  double spacing() const { return count > 1 ? (max - min) / (count - 1) : 0.0; }
};

/// Rectangular lattice; nodes enumerate row-major with the first axis outermost.
struct Grid {
  std::vector<GridAxis> axes;

  std::size_t node_count() const;
  Eigen::VectorXd node(std::size_t flat) const;
  std::vector<int> digits(std::size_t flat) const;
  std::size_t flat_index(std::span<const int> digits) const;
};

/// A numerically extended section sampled on a grid.
struct FieldSample {
  Grid grid;
  std::vector<Eigen::VectorXd> nodes;
  std::vector<KostantElement> values;
};

/// Transports e0 from `base` to every grid node along the axis-ordered
/// polyline (axis 1 first, then axis 2, ...). Each straight segment uses
/// ceil(length / spacing * steps_per_cell) RK4 steps.
FieldSample extend_killing(const Chart& chart, const Eigen::VectorXd& base, const KostantElement& e0,
                           const Grid& grid, int steps_per_cell);

struct KillingResidual {
  double max_sym_residual = 0.0;
  double max_tangency_residual = 0.0;
  double max_invariant_gradient = 0.0;  // largest |dI| seen, to show tangency is non-vacuous
};

/// Killing-equation residual of the sampled vector field from central
/// differences at interior nodes, and the tangency residual |dI(v)| over the
/// invariants (default: enumerate_patterns with default bounds).
KillingResidual killing_residual(const Chart& chart, const FieldSample& sample,
                                 const std::optional<InvariantSet>& invariants = std::nullopt);

/// Deviation between transports of e0 from base to target along the two
/// axis-ordered L-paths (ascending vs. descending axis order).
double path_independence(const Chart& chart, const Eigen::VectorXd& base, const KostantElement& e0,
                         const Eigen::VectorXd& target, int steps);

/// CSV export: header coord_1..coord_n, v_1..v_n, B_11..B_nn; 17 significant digits.
void write_csv(std::ostream& out, const FieldSample& sample);

}  // namespace geoscope
