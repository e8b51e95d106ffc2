#include "geoscope/extension.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "geoscope/error.hpp"
#include "geoscope/geometry.hpp"
#include "geoscope/linalg.hpp"

namespace geoscope {

std::size_t Grid::node_count() const {
  std::size_t count = 1;
  for (const auto& a : axes) count *= static_cast<std::size_t>(a.count);
  return axes.empty() ? 0 : count;
}

std::vector<int> Grid::digits(std::size_t flat) const {
  std::vector<int> d(axes.size());
  for (std::size_t i = axes.size(); i-- > 0;) {
    d[i] = static_cast<int>(flat % static_cast<std::size_t>(axes[i].count));
    flat /= static_cast<std::size_t>(axes[i].count);
  }
  return d;
}

std::size_t Grid::flat_index(std::span<const int> digits) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < axes.size(); ++i) flat = flat * static_cast<std::size_t>(axes[i].count) + digits[i];
  return flat;
}

Eigen::VectorXd Grid::node(std::size_t flat) const {
  const auto d = digits(flat);
  Eigen::VectorXd p(static_cast<Eigen::Index>(axes.size()));
  for (std::size_t i = 0; i < axes.size(); ++i) p(static_cast<Eigen::Index>(i)) = axes[i].node(d[i]);
  return p;
}

namespace {

void validate_grid(const Chart& chart, const Grid& grid) {
  if (static_cast<int>(grid.axes.size()) != chart.dim()) throw ShapeError("grid needs one axis per coordinate");
  for (const auto& a : grid.axes) {
    if (a.count < 1) throw ShapeError("grid axes need at least one node");
    if (a.count > 1 && !(a.max > a.min)) throw ShapeError("grid axis needs max > min");
  }
}

// Transports e along one axis-aligned leg, choosing the step count from the
// leg length relative to the grid spacing.
KostantElement leg(const Chart& chart, const Eigen::VectorXd& from, const Eigen::VectorXd& to,
                   const KostantElement& e, double spacing, int steps_per_cell) {
  const double length = (to - from).norm();
  if (length == 0.0) return e;
  const double cells = spacing > 0.0 ? length / spacing : 1.0;
  const int steps = std::max(1, static_cast<int>(std::ceil(cells * steps_per_cell - 1e-9)));
  const std::vector<Eigen::VectorXd> path{from, to};
  return parallel_transport(chart, path, e, steps);
}

}  // namespace

FieldSample extend_killing(const Chart& chart, const Eigen::VectorXd& base, const KostantElement& e0,
                           const Grid& grid, int steps_per_cell) {
  validate_grid(chart, grid);
  if (steps_per_cell < 1) throw NumericalError("steps_per_cell must be positive");
  const int n = chart.dim();
  FieldSample sample;
  sample.grid = grid;
  const std::size_t count = grid.node_count();
  sample.nodes.reserve(count);
  sample.values.reserve(count);

  // Legs sharing a prefix are transported once: cache[axis] holds the
  // transported element at the partial path through the previous node.
  std::vector<Eigen::VectorXd> prefix_point(n + 1);
  std::vector<KostantElement> prefix_value(n + 1);
  std::vector<int> last_digits;
  for (std::size_t flat = 0; flat < count; ++flat) {
    const auto d = grid.digits(flat);
    const Eigen::VectorXd target = grid.node(flat);
    int reuse = 0;
    if (!last_digits.empty()) {
      while (reuse < n && d[reuse] == last_digits[reuse]) ++reuse;
    }
    prefix_point[0] = base;
    prefix_value[0] = e0;
    for (int axis = reuse; axis < n; ++axis) {
      Eigen::VectorXd next = prefix_point[axis];
      next(axis) = target(axis);
      prefix_value[axis + 1] =
          leg(chart, prefix_point[axis], next, prefix_value[axis], grid.axes[axis].spacing(), steps_per_cell);
      prefix_point[axis + 1] = next;
    }
    last_digits = d;
    sample.nodes.push_back(target);
    sample.values.push_back(prefix_value[n]);
  }
  return sample;
}

KillingResidual killing_residual(const Chart& chart, const FieldSample& sample,
                                 const std::optional<InvariantSet>& invariants) {
  const int n = chart.dim();
  const Grid& grid = sample.grid;
  validate_grid(chart, grid);
  for (const auto& a : grid.axes) {
    if (a.count < 3) throw ShapeError("killing residual needs at least 3 nodes per axis");
  }
  if (sample.values.size() != grid.node_count()) throw ShapeError("sample does not cover the grid");
  const InvariantSet set =
      invariants ? *invariants : enumerate_patterns(n, default_max_order(n), kDefaultMaxValence);

  KillingResidual out;
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    auto d = grid.digits(flat);
    bool interior = true;
    for (int i = 0; i < n; ++i) interior = interior && d[i] > 0 && d[i] + 1 < grid.axes[i].count;
    if (!interior) continue;

    const Eigen::VectorXd& p = sample.nodes[flat];
    const Eigen::VectorXd& v = sample.values[flat].v;
    const LocalGeometry geo = local_geometry(chart, as_span(p), 0);
    // A^i_j = d_j v^i + Gamma^i_jk v^k
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
      auto up = d;
      auto down = d;
      ++up[j];
      --down[j];
      const Eigen::VectorXd dv =
          (sample.values[grid.flat_index(up)].v - sample.values[grid.flat_index(down)].v) /
          (2.0 * grid.axes[j].spacing());
      A.col(j) = dv;
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) A(i, j) += geo.gamma({i, j, k}) * v(k);
      }
    }
    const Eigen::MatrixXd g = to_matrix(geo.g);
    const Eigen::MatrixXd g_inv = to_matrix(geo.g_inv);
    const Eigen::MatrixXd sym = 0.5 * (A + g_inv * A.transpose() * g);
    out.max_sym_residual = std::max(out.max_sym_residual, sym.norm());

    const Eigen::MatrixXd grads = invariant_gradients(set, chart, as_span(p));
    if (grads.rows() > 0) {
      out.max_tangency_residual = std::max(out.max_tangency_residual, (grads * v).cwiseAbs().maxCoeff());
      out.max_invariant_gradient = std::max(out.max_invariant_gradient, grads.rowwise().norm().maxCoeff());
    }
  }
  return out;
}

double path_independence(const Chart& chart, const Eigen::VectorXd& base, const KostantElement& e0,
                         const Eigen::VectorXd& target, int steps) {
  const int n = chart.dim();
  if (base.size() != n || target.size() != n) throw ShapeError("points must match the chart dimension");
  auto l_path = [&](bool ascending) {
    std::vector<Eigen::VectorXd> path{base};
    Eigen::VectorXd at = base;
    for (int k = 0; k < n; ++k) {
      const int axis = ascending ? k : n - 1 - k;
      if (at(axis) == target(axis)) continue;
      at(axis) = target(axis);
      path.push_back(at);
    }
    return parallel_transport(chart, path, e0, steps);
  };
  return (l_path(true) - l_path(false)).norm();
}

void write_csv(std::ostream& out, const FieldSample& sample) {
  const int n = static_cast<int>(sample.grid.axes.size());
  for (int i = 1; i <= n; ++i) out << "coord_" << i << ",";
  for (int i = 1; i <= n; ++i) out << "v_" << i << ",";
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) out << "B_" << i << j << (i == n && j == n ? "\n" : ",");
  }
  char buf[40];
  auto put = [&](double x, bool last) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf << (last ? "\n" : ",");
  };
  for (std::size_t k = 0; k < sample.values.size(); ++k) {
    for (int i = 0; i < n; ++i) put(sample.nodes[k](i), false);
    for (int i = 0; i < n; ++i) put(sample.values[k].v(i), false);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) put(sample.values[k].B(i, j), i == n - 1 && j == n - 1);
    }
  }
}

}  // namespace geoscope
