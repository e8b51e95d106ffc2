#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "geoscope/chart.hpp"
#include "geoscope/kostant.hpp"
#include "geoscope/linalg.hpp"
#include "geoscope/tensor.hpp"

namespace geoscope {

/// Derivation action of an endomorphism on a fully lowered tensor:
/// (B.T)(X_1, ..., X_r) = -sum_i T(X_1, ..., B X_i, ..., X_r).
Tensor derivation_action(const Eigen::MatrixXd& B, const Tensor& t);

/// Coordinates on E_q = T_qM + so(T_qM): the first n parameters are
/// coordinate-vector components of v, the remaining n(n-1)/2 multiply the
/// generators f_a g(f_b, .) - f_b g(f_a, .) (a < b) built from a
/// Gram-Schmidt orthonormalized coordinate frame f.
class KostantBasis {
 public:
  explicit KostantBasis(const Eigen::MatrixXd& g);

  int dim() const noexcept { return dim_; }
  int size() const noexcept { return dim_ + dim_ * (dim_ - 1) / 2; }
  const Eigen::MatrixXd& frame() const noexcept { return frame_; }
  const std::vector<Eigen::MatrixXd>& generators() const noexcept { return generators_; }

  KostantElement element(const Eigen::VectorXd& params) const;
  /// Inverse of element() on g-skew B.
  Eigen::VectorXd parameters(const KostantElement& e) const;

 private:
  int dim_;
  Eigen::MatrixXd g_;
  Eigen::MatrixXd frame_;  // columns orthonormal in g
  std::vector<Eigen::MatrixXd> generators_;
};

inline int kostant_fiber_dim(int n) { return n + n * (n - 1) / 2; }

/// Stacked constraints (nabla_v nabla^i R - B.nabla^i R, i = 0..k) as a
/// linear map on KostantBasis parameters. Needs the tower to depth k + 1.
Eigen::MatrixXd constraint_matrix(std::span<const Tensor> tower, const KostantBasis& basis, int k);
Eigen::MatrixXd constraint_matrix(const Chart& chart, std::span<const double> point, int k);

struct StabilizationReport {
  Eigen::VectorXd point;
  std::vector<int> dims;                               // dim E^0, dim E^1, ...
  int singer_invariant = 0;                            // first k with dims[k] == dims[k+1]
  std::vector<KostantElement> stable_basis;            // orthonormal in parameter space
  Eigen::MatrixXd stable_parameters;                   // same basis as parameter columns
  int orbit_dim = 0;
  int isotropy_dim = 0;
  bool homogeneous = false;
  std::vector<std::vector<double>> singular_values;    // per level k
  double rank_tol = kDefaultRankTol;

  int killing_dim() const { return dims.empty() ? 0 : dims[singer_invariant]; }
};

/// Thrown when the filtration fails to stabilize below the fiber dimension.
class StabilizationError : public NumericalError {
 public:
  StabilizationError(const std::string& message, std::vector<int> dims)
      : NumericalError(message), dims_(std::move(dims)) {}
  const std::vector<int>& dims() const noexcept { return dims_; }

 private:
  std::vector<int> dims_;
};

/// Hard cap on the filtration index: n + n(n-1)/2 + 1.
inline int stabilization_cap(int n) { return kostant_fiber_dim(n) + 1; }

/// Computes dim E^k for k = 0, 1, ... until two consecutive dimensions
/// agree. `max_tower_depth` (0 = cap + 1) bounds the covariant derivatives
/// used.
StabilizationReport stabilize(const Chart& chart, std::span<const double> point, double rank_tol = kDefaultRankTol,
                              int max_tower_depth = 0);

/// max over the stable basis of |bundle_curvature(X, Y, e)|.
double flatness_check(const Chart& chart, std::span<const double> point, const StabilizationReport& report,
                      const Eigen::VectorXd& X, const Eigen::VectorXd& Y);

/// Transports each stable element a distance h along X and returns the
/// largest component orthogonal to the stable subspace at the endpoint.
double parallelness_check(const Chart& chart, std::span<const double> point, const StabilizationReport& report,
                          const Eigen::VectorXd& X, double h, int steps = 8);

/// Transports `params` (KostantBasis coordinates at `point`) a distance h
/// along X and returns the norm of the level-k constraint map at the endpoint
/// applied to it.
double propagation_residual(const Chart& chart, std::span<const double> point, const Eigen::VectorXd& params, int k,
                            const Eigen::VectorXd& X, double h);

}  // namespace geoscope
