#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace geoscope {

/// Default relative tolerance for rank decisions.
inline constexpr double kDefaultRankTol = 1e-8;

/// Singular value decomposition summary used for every rank decision.
struct RankInfo {
  int rank = 0;
  double threshold = 0.0;
  std::vector<double> singular_values;  // descending
  Eigen::MatrixXd right_vectors;        // full V, columns ordered like singular_values
};

/// Numerical rank of `m`: the count of singular values above
/// rank_tol * max(sigma_max, 1).
RankInfo numerical_rank(const Eigen::MatrixXd& m, double rank_tol = kDefaultRankTol);

/// Orthonormal basis of the numerical kernel (columns).
Eigen::MatrixXd kernel_basis(const RankInfo& info);

inline std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace geoscope
