#include "geoscope/linalg.hpp"

#include <algorithm>

namespace geoscope {

RankInfo numerical_rank(const Eigen::MatrixXd& m, double rank_tol) {
  RankInfo info;
  const auto cols = m.cols();
  if (m.rows() == 0 || cols == 0) {
    info.right_vectors = Eigen::MatrixXd::Identity(cols, cols);
    info.singular_values.assign(0, 0.0);
    return info;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  info.singular_values.assign(sigma.data(), sigma.data() + sigma.size());
  const double top = sigma.size() > 0 ? sigma(0) : 0.0;
  info.threshold = rank_tol * std::max(top, 1.0);
  info.rank = static_cast<int>(std::count_if(info.singular_values.begin(), info.singular_values.end(),
                                             [&](double s) { return s > info.threshold; }));
  info.right_vectors = svd.matrixV();
  return info;
}

Eigen::MatrixXd kernel_basis(const RankInfo& info) {
  const auto cols = info.right_vectors.cols();
  return info.right_vectors.rightCols(cols - info.rank);
}

}  // namespace geoscope
