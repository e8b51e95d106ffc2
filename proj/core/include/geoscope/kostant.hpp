#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "geoscope/chart.hpp"
#include "geoscope/geometry.hpp"

namespace geoscope {

/// Fiber element (v, B) of E = TM + so(TM): a tangent vector and a
/// g-skew endomorphism, both in coordinate components (B is B^i_j).
struct KostantElement {
  Eigen::VectorXd v;
  Eigen::MatrixXd B;

  static KostantElement zero(int dim) { return {Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Zero(dim, dim)}; }

  KostantElement& operator+=(const KostantElement& o) {
    v += o.v;
    B += o.B;
    return *this;
  }
  friend KostantElement operator+(KostantElement a, const KostantElement& b) { return a += b; }
  friend KostantElement operator-(KostantElement a, const KostantElement& b) {
    a.v -= b.v;
    a.B -= b.B;
    return a;
  }
  friend KostantElement operator*(double s, KostantElement a) {
    a.v *= s;
    a.B *= s;
    return a;
  }
  /// Euclidean norm over all coordinate components of v and B.
  double norm() const { return std::sqrt(v.squaredNorm() + B.squaredNorm()); }
};

/// A section near its base point: value plus coordinate first partials.
struct SectionJet {
  Eigen::VectorXd point;
  KostantElement value;
  std::vector<Eigen::VectorXd> dv;  // dv[j] = d_j v
  std::vector<Eigen::MatrixXd> dB;  // dB[j] = d_j B
};

Eigen::MatrixXd to_matrix(const Tensor& rank2);

/// max |g B + (g B)^T|: zero for g-skew B.
double skewness_defect(const Eigen::MatrixXd& g, const Eigen::MatrixXd& B);

/// (R_{X,Y})^a_b, the endomorphism Z -> R(X,Y)Z, from the lowered curvature.
Eigen::MatrixXd curvature_operator(const Tensor& riemann, const Tensor& g_inv, const Eigen::VectorXd& X,
                                   const Eigen::VectorXd& Y);
/// ((nabla_v R)_{X,Y})^a_b from the lowered first covariant derivative.
Eigen::MatrixXd curvature_derivative_operator(const Tensor& nabla_riemann, const Tensor& g_inv,
                                              const Eigen::VectorXd& v, const Eigen::VectorXd& X,
                                              const Eigen::VectorXd& Y);

/// Canonical lift (Z(p), g-skew part of nabla Z at p) of the vector field
/// with coordinate components `field`.
KostantElement canonical_lift(const Chart& chart, std::span<const Expr> field, std::span<const double> point);
/// Canonical lift together with its exact first partials.
SectionJet canonical_lift_jet(const Chart& chart, std::span<const Expr> field, std::span<const double> point);

/// Kostant connection nabla~_X (v, B) = (nabla_X v - B X, nabla_X B - R(X, v)).
KostantElement connection_apply(const Chart& chart, const SectionJet& section, const Eigen::VectorXd& X);

/// Curvature of nabla~: (0, (nabla_v R)_{X,Y} - (B.R)_{X,Y}) with B acting as a derivation.
KostantElement bundle_curvature(const Chart& chart, std::span<const double> point, const Eigen::VectorXd& X,
                                const Eigen::VectorXd& Y, const KostantElement& e);

/// Parallel transport in E along a polyline with fixed-step RK4.
KostantElement parallel_transport(const Chart& chart, std::span<const Eigen::VectorXd> waypoints,
                                  const KostantElement& e0, int steps_per_segment);

}  // namespace geoscope
