#include "geoscope/stabilization.hpp"

#include <algorithm>
#include <sstream>

#include "geoscope/error.hpp"
#include "geoscope/geometry.hpp"

namespace geoscope {

Tensor derivation_action(const Eigen::MatrixXd& B, const Tensor& t) {
  const int n = t.dim();
  if (B.rows() != n || B.cols() != n) throw ShapeError("endomorphism does not match tensor dimension");
  for (auto v : t.signature()) {
    if (v != Variance::lower) throw ShapeError("derivation action expects a fully lowered tensor");
  }
  Tensor out(n, t.signature());
  const int r = t.rank();
  for (std::size_t f = 0; f < t.size(); ++f) {
    double acc = 0.0;
    for (int s = 0; s < r; ++s) {
      const int i = t.digit(f, s);
      const std::size_t base = f - static_cast<std::size_t>(i) * t.stride(s);
      for (int m = 0; m < n; ++m) {
        const double b = B(m, i);
        if (b != 0.0) acc -= t[base + static_cast<std::size_t>(m) * t.stride(s)] * b;
      }
    }
    out[f] = acc;
  }
  return out;
}

KostantBasis::KostantBasis(const Eigen::MatrixXd& g) : dim_(static_cast<int>(g.rows())), g_(g) {
  const int n = dim_;
  frame_ = Eigen::MatrixXd::Identity(n, n);
  for (int a = 0; a < n; ++a) {
    Eigen::VectorXd f = frame_.col(a);
    for (int b = 0; b < a; ++b) f -= frame_.col(b).dot(g * f) * frame_.col(b);
    const double len = std::sqrt(f.dot(g * f));
    if (!(len > 0.0)) throw NumericalError("degenerate metric while building an orthonormal frame");
    frame_.col(a) = f / len;
  }
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const Eigen::VectorXd fa = frame_.col(a);
      const Eigen::VectorXd fb = frame_.col(b);
      generators_.push_back(fa * (g * fb).transpose() - fb * (g * fa).transpose());
    }
  }
}

KostantElement KostantBasis::element(const Eigen::VectorXd& params) const {
  if (params.size() != size()) throw ShapeError("parameter vector does not match the fiber dimension");
  KostantElement e = KostantElement::zero(dim_);
  e.v = params.head(dim_);
  for (std::size_t k = 0; k < generators_.size(); ++k) e.B += params(dim_ + static_cast<Eigen::Index>(k)) * generators_[k];
  return e;
}

Eigen::VectorXd KostantBasis::parameters(const KostantElement& e) const {
  Eigen::VectorXd params(size());
  params.head(dim_) = e.v;
  // In the orthonormal frame each generator is the elementary skew matrix.
  const Eigen::MatrixXd in_frame = frame_.transpose() * g_ * e.B * frame_;
  int k = dim_;
  for (int a = 0; a < dim_; ++a) {
    for (int b = a + 1; b < dim_; ++b) params(k++) = in_frame(a, b);
  }
  return params;
}

namespace {

Eigen::MatrixXd constraint_block(std::span<const Tensor> tower, const KostantBasis& basis, int i) {
  const int n = basis.dim();
  if (static_cast<int>(tower.size()) < i + 2) {
    std::ostringstream msg;
    msg << "constraint level " << i << " needs tower depth " << i + 1;
    throw ShapeError(msg.str());
  }
  const Tensor& T = tower[i];
  const Tensor& D = tower[i + 1];
  const auto rows = static_cast<Eigen::Index>(T.size());
  Eigen::MatrixXd block(rows, basis.size());
  for (int j = 0; j < n; ++j) {
    for (Eigen::Index r = 0; r < rows; ++r) block(r, j) = D[static_cast<std::size_t>(j) * T.size() + r];
  }
  for (std::size_t k = 0; k < basis.generators().size(); ++k) {
    const Tensor action = derivation_action(basis.generators()[k], T);
    for (Eigen::Index r = 0; r < rows; ++r) block(r, n + static_cast<Eigen::Index>(k)) = -action[r];
  }
  return block;
}

// Replaces a tall matrix by the triangular factor of its QR decomposition;
// singular values and kernel are unchanged.
Eigen::MatrixXd compress(const Eigen::MatrixXd& m) {
  if (m.rows() <= m.cols()) return m;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
}

}  // namespace

Eigen::MatrixXd constraint_matrix(std::span<const Tensor> tower, const KostantBasis& basis, int k) {
  if (k < 0) throw ShapeError("constraint level must be non-negative");
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::Index rows = 0;
  for (int i = 0; i <= k; ++i) {
    blocks.push_back(constraint_block(tower, basis, i));
    rows += blocks.back().rows();
  }
  Eigen::MatrixXd out(rows, basis.size());
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  return out;
}

Eigen::MatrixXd constraint_matrix(const Chart& chart, std::span<const double> point, int k) {
  const LocalGeometry geo = local_geometry(chart, point, k + 1);
  return constraint_matrix(geo.tower, KostantBasis(to_matrix(geo.g)), k);
}

StabilizationReport stabilize(const Chart& chart, std::span<const double> point, double rank_tol,
                              int max_tower_depth) {
  const int n = chart.dim();
  const int cap = stabilization_cap(n);
  if (max_tower_depth <= 0) max_tower_depth = cap + 1;

  StabilizationReport report;
  report.point = Eigen::Map<const Eigen::VectorXd>(point.data(), n);
  report.rank_tol = rank_tol;

  int depth = std::min(2, max_tower_depth);
  LocalGeometry geo = local_geometry(chart, point, depth);
  const KostantBasis basis(to_matrix(geo.g));

  Eigen::MatrixXd stacked(0, basis.size());
  RankInfo previous;
  for (int k = 0;; ++k) {
    if (k > cap || k + 1 > max_tower_depth) {
      std::ostringstream msg;
      msg << "filtration did not stabilize by level " << k - 1 << " (dims";
      for (int d : report.dims) msg << " " << d;
      msg << "); check rank_tol";
      throw StabilizationError(msg.str(), report.dims);
    }
    if (k + 1 > depth) {
      depth = std::min(std::max(k + 1, 2 * depth), max_tower_depth);
      geo = local_geometry(chart, point, depth);
    }
    const Eigen::MatrixXd block = constraint_block(geo.tower, basis, k);
    Eigen::MatrixXd grown(stacked.rows() + block.rows(), basis.size());
    grown << stacked, block;
    stacked = compress(grown);

    RankInfo info = numerical_rank(stacked, rank_tol);
    report.singular_values.push_back(info.singular_values);
    report.dims.push_back(basis.size() - info.rank);
    if (k > 0 && report.dims[k] == report.dims[k - 1]) {
      report.singer_invariant = k - 1;
      break;
    }
    previous = std::move(info);
  }

  report.stable_parameters = kernel_basis(previous);
  for (Eigen::Index c = 0; c < report.stable_parameters.cols(); ++c) {
    report.stable_basis.push_back(basis.element(report.stable_parameters.col(c)));
  }
  if (report.stable_parameters.cols() > 0) {
    report.orbit_dim = numerical_rank(report.stable_parameters.topRows(n), rank_tol).rank;
  }
  report.isotropy_dim = report.killing_dim() - report.orbit_dim;
  report.homogeneous = report.orbit_dim == n;
  return report;
}

double flatness_check(const Chart& chart, std::span<const double> point, const StabilizationReport& report,
                      const Eigen::VectorXd& X, const Eigen::VectorXd& Y) {
  double worst = 0.0;
  for (const auto& e : report.stable_basis) {
    worst = std::max(worst, bundle_curvature(chart, point, X, Y, e).norm());
  }
  return worst;
}

namespace {
constexpr int kCheckSteps = 8;
}

double parallelness_check(const Chart& chart, std::span<const double> point, const StabilizationReport& report,
                          const Eigen::VectorXd& X, double h, int steps) {
  const Eigen::VectorXd start = Eigen::Map<const Eigen::VectorXd>(point.data(), chart.dim());
  const Eigen::VectorXd end = start + h * X;
  const std::vector<Eigen::VectorXd> path{start, end};
  const StabilizationReport there = stabilize(chart, as_span(end), report.rank_tol);
  const KostantBasis basis(to_matrix(local_geometry(chart, as_span(end), 0).g));
  const Eigen::MatrixXd& K = there.stable_parameters;
  double worst = 0.0;
  for (const auto& e : report.stable_basis) {
    const Eigen::VectorXd params = basis.parameters(parallel_transport(chart, path, e, steps));
    const Eigen::VectorXd outside = params - K * (K.transpose() * params);
    worst = std::max(worst, outside.norm());
  }
  return worst;
}

double propagation_residual(const Chart& chart, std::span<const double> point, const Eigen::VectorXd& params, int k,
                            const Eigen::VectorXd& X, double h) {
  const Eigen::VectorXd start = Eigen::Map<const Eigen::VectorXd>(point.data(), chart.dim());
  const Eigen::VectorXd end = start + h * X;
  const KostantBasis here(to_matrix(local_geometry(chart, point, 0).g));
  const std::vector<Eigen::VectorXd> path{start, end};
  const KostantElement moved = parallel_transport(chart, path, here.element(params), kCheckSteps);

  const LocalGeometry geo = local_geometry(chart, as_span(end), k + 1);
  const KostantBasis there(to_matrix(geo.g));
  return (constraint_matrix(geo.tower, there, k) * there.parameters(moved)).norm();
}

}  // namespace geoscope
