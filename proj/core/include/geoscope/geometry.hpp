#pragma once

#include <span>
#include <vector>

#include "geoscope/chart.hpp"
#include "geoscope/tensor.hpp"

namespace geoscope {

/// Smallest eigenvalue the metric may have at an evaluation point.
inline constexpr double kPositiveDefiniteTol = 1e-10;

/// Metric components g_ij as jets of the given order. Throws DomainError
/// outside the chart's domain hints and NumericalError when the metric is
/// not positive definite (the message reports the smallest eigenvalue).
JetTensor metric_at(const Chart& chart, std::span<const double> point, int order);

/// Jet-valued inverse g^ij by pivot-free Gauss-Jordan elimination.
JetTensor invert_metric(const JetTensor& g);

/// Christoffel symbols Gamma^k_ij (signature upper, lower, lower) from jets
/// of g and its inverse; the result is one jet order below g.
JetTensor christoffel(const JetTensor& g, const JetTensor& g_inv);
JetTensor christoffel(const Chart& chart, std::span<const double> point, int order);

/// Fully lowered curvature R_abcd = g(R(d_a, d_b) d_d, d_c) with
/// R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]; two jet orders below g.
JetTensor riemann(const JetTensor& g, const JetTensor& gamma);

/// Covariant derivative; prepends one lower slot and drops one jet order.
JetTensor covariant_derivative(const JetTensor& t, const JetTensor& gamma);

/// Jet-valued local data: metric, inverse, connection and the curvature
/// tower [R, nabla R, ..., nabla^s R]. Entry s keeps `extra_order` jet
/// orders beyond its value.
struct JetTower {
  JetTensor g;
  JetTensor g_inv;
  JetTensor gamma;
  std::vector<JetTensor> tower;
};

JetTower curvature_tower_jets(const Chart& chart, std::span<const double> point, int s_max,
                              int extra_order = 0);

/// Numeric tower [R, nabla R, ..., nabla^{s_max} R]. Entry s has 4 + s lower
/// slots; derivative slots come first, outermost derivative first.
std::vector<Tensor> curvature_tower(const Chart& chart, std::span<const double> point, int s_max);

/// Numeric local geometry at a point.
struct LocalGeometry {
  Tensor g;                    // lower, lower
  Tensor g_inv;                // upper, upper
  Tensor gamma;                // upper, lower, lower
  std::vector<Tensor> tower;   // [R, nabla R, ...]
};

LocalGeometry local_geometry(const Chart& chart, std::span<const double> point, int s_max = 0);

}  // namespace geoscope
