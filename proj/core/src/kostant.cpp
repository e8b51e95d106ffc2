#include "geoscope/kostant.hpp"

#include <sstream>

#include "geoscope/error.hpp"
#include "geoscope/linalg.hpp"

namespace geoscope {

Eigen::MatrixXd to_matrix(const Tensor& t) {
  if (t.rank() != 2) throw ShapeError("expected a rank-2 tensor");
  const int n = t.dim();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = t[i * n + j];
  }
  return m;
}

double skewness_defect(const Eigen::MatrixXd& g, const Eigen::MatrixXd& B) {
  const Eigen::MatrixXd gB = g * B;
  return (gB + gB.transpose()).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd curvature_operator(const Tensor& riemann, const Tensor& g_inv, const Eigen::VectorXd& X,
                                   const Eigen::VectorXd& Y) {
  const int n = riemann.dim();
  if (riemann.rank() != 4) throw ShapeError("curvature operator needs the lowered rank-4 curvature");
  // lowered(c, b) = R(X, Y, c, b) = g(R(X,Y) d_b, d_c)
  Eigen::MatrixXd lowered = Eigen::MatrixXd::Zero(n, n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      const double w = X(p) * Y(q);
      if (w == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        for (int b = 0; b < n; ++b) lowered(c, b) += w * riemann({p, q, c, b});
      }
    }
  }
  return to_matrix(g_inv) * lowered;
}

Eigen::MatrixXd curvature_derivative_operator(const Tensor& nabla_riemann, const Tensor& g_inv,
                                              const Eigen::VectorXd& v, const Eigen::VectorXd& X,
                                              const Eigen::VectorXd& Y) {
  const int n = nabla_riemann.dim();
  if (nabla_riemann.rank() != 5) throw ShapeError("expected the rank-5 tensor nabla R");
  Eigen::MatrixXd lowered = Eigen::MatrixXd::Zero(n, n);
  for (int e = 0; e < n; ++e) {
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        const double w = v(e) * X(p) * Y(q);
        if (w == 0.0) continue;
        for (int c = 0; c < n; ++c) {
          for (int b = 0; b < n; ++b) lowered(c, b) += w * nabla_riemann({e, p, q, c, b});
        }
      }
    }
  }
  return to_matrix(g_inv) * lowered;
}

SectionJet canonical_lift_jet(const Chart& chart, std::span<const Expr> field, std::span<const double> point) {
  const int n = chart.dim();
  if (static_cast<int>(field.size()) != n) throw ShapeError("vector field needs one component per coordinate");
  const JetTensor g = metric_at(chart, point, 2);
  const JetTensor g_inv = invert_metric(g);
  const JetTensor gamma = christoffel(g, g_inv);  // order 1
  std::vector<Jet> Z;
  for (const auto& e : field) Z.push_back(evaluate(e, point, 2));

  // A^i_j = d_j Z^i + Gamma^i_jk Z^k  (the endomorphism X -> nabla_X Z)
  std::vector<Jet> A(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Jet acc = Z[i].derivative(j);
      for (int k = 0; k < n; ++k) acc += gamma({i, j, k}) * Z[k].truncated(1);
      A[i * n + j] = acc;
    }
  }
  // B = (A - g^-1 A^T g) / 2
  std::vector<Jet> B(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Jet adj = Jet::constant(0.0, n, 1);
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) adj += g_inv({i, k}).truncated(1) * A[l * n + k] * g({l, j}).truncated(1);
      }
      B[i * n + j] = (A[i * n + j] - adj) * Jet(0.5);
    }
  }

  SectionJet out;
  out.point = Eigen::Map<const Eigen::VectorXd>(point.data(), n);
  out.value = KostantElement::zero(n);
  out.dv.assign(n, Eigen::VectorXd::Zero(n));
  out.dB.assign(n, Eigen::MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i) {
    out.value.v(i) = Z[i].value();
    const auto grad = Z[i].truncated(1).gradient();
    for (int j = 0; j < n; ++j) out.dv[j](i) = grad[j];
    for (int k = 0; k < n; ++k) {
      const Jet& b = B[i * n + k];
      out.value.B(i, k) = b.value();
      const auto gb = b.gradient();
      for (int j = 0; j < n; ++j) out.dB[j](i, k) = gb[j];
    }
  }
  return out;
}

KostantElement canonical_lift(const Chart& chart, std::span<const Expr> field, std::span<const double> point) {
  return canonical_lift_jet(chart, field, point).value;
}

namespace {

// (Gamma_X)^i_k = Gamma^i_jk X^j
Eigen::MatrixXd connection_matrix(const Tensor& gamma, const Eigen::VectorXd& X) {
  const int n = gamma.dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (X(j) == 0.0) continue;
      for (int k = 0; k < n; ++k) m(i, k) += gamma({i, j, k}) * X(j);
    }
  }
  return m;
}

}  // namespace

KostantElement connection_apply(const Chart& chart, const SectionJet& section, const Eigen::VectorXd& X) {
  const int n = chart.dim();
  if (X.size() != n || section.value.v.size() != n || section.value.B.rows() != n || section.value.B.cols() != n ||
      static_cast<int>(section.dv.size()) != n || static_cast<int>(section.dB.size()) != n) {
    throw ShapeError("section and direction must match the chart dimension");
  }
  const LocalGeometry geo = local_geometry(chart, as_span(section.point), 0);
  const Eigen::MatrixXd GX = connection_matrix(geo.gamma, X);
  const auto& [v, B] = section.value;

  Eigen::VectorXd dv_X = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd dB_X = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    dv_X += X(j) * section.dv[j];
    dB_X += X(j) * section.dB[j];
  }
  KostantElement out;
  out.v = dv_X + GX * v - B * X;
  out.B = dB_X + GX * B - B * GX - curvature_operator(geo.tower[0], geo.g_inv, X, v);
  return out;
}

KostantElement bundle_curvature(const Chart& chart, std::span<const double> point, const Eigen::VectorXd& X,
                                const Eigen::VectorXd& Y, const KostantElement& e) {
  const int n = chart.dim();
  if (X.size() != n || Y.size() != n || e.v.size() != n) throw ShapeError("bundle curvature shape mismatch");
  const LocalGeometry geo = local_geometry(chart, point, 1);
  const Tensor& R = geo.tower[0];
  const Eigen::MatrixXd RXY = curvature_operator(R, geo.g_inv, X, Y);
  const Eigen::MatrixXd BR = e.B * RXY - RXY * e.B - curvature_operator(R, geo.g_inv, e.B * X, Y) -
                             curvature_operator(R, geo.g_inv, X, e.B * Y);
  KostantElement out;
  out.v = Eigen::VectorXd::Zero(n);
  out.B = curvature_derivative_operator(geo.tower[1], geo.g_inv, e.v, X, Y) - BR;
  return out;
}

namespace {

// Right-hand side of the transport ODE along direction d at point p.
KostantElement transport_rate(const Chart& chart, const Eigen::VectorXd& p, const Eigen::VectorXd& d,
                              const KostantElement& e) {
  const LocalGeometry geo = local_geometry(chart, as_span(p), 0);
  const Eigen::MatrixXd Gd = connection_matrix(geo.gamma, d);
  KostantElement rate;
  rate.v = -Gd * e.v + e.B * d;
  rate.B = -(Gd * e.B - e.B * Gd) + curvature_operator(geo.tower[0], geo.g_inv, d, e.v);
  return rate;
}

}  // namespace

KostantElement parallel_transport(const Chart& chart, std::span<const Eigen::VectorXd> waypoints,
                                  const KostantElement& e0, int steps_per_segment) {
  const int n = chart.dim();
  if (steps_per_segment < 1) throw NumericalError("parallel transport needs at least one step per segment");
  if (waypoints.empty()) throw ShapeError("transport curve has no waypoints");
  if (e0.v.size() != n || e0.B.rows() != n || e0.B.cols() != n) throw ShapeError("element does not match chart");
  for (const auto& w : waypoints) {
    if (w.size() != n) throw ShapeError("waypoint dimension does not match the chart");
  }

  KostantElement e = e0;
  for (std::size_t s = 0; s + 1 < waypoints.size(); ++s) {
    const Eigen::VectorXd& a = waypoints[s];
    const Eigen::VectorXd d = waypoints[s + 1] - a;
    if (d.norm() == 0.0) continue;
    const double h = 1.0 / steps_per_segment;
    for (int k = 0; k < steps_per_segment; ++k) {
      const double t = k * h;
      const Eigen::VectorXd p0 = a + t * d;
      const Eigen::VectorXd pm = a + (t + 0.5 * h) * d;
      const Eigen::VectorXd p1 = a + (t + h) * d;
      const KostantElement k1 = transport_rate(chart, p0, d, e);
      const KostantElement k2 = transport_rate(chart, pm, d, e + (0.5 * h) * k1);
      const KostantElement k3 = transport_rate(chart, pm, d, e + (0.5 * h) * k2);
      const KostantElement k4 = transport_rate(chart, p1, d, e + h * k3);
      e += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }

  const Eigen::MatrixXd g = to_matrix(local_geometry(chart, as_span(waypoints.back()), 0).g);
  const double defect = skewness_defect(g, e.B);
  if (defect > 1e-8 * std::max(1.0, (g * e.B).cwiseAbs().maxCoeff())) {
    std::ostringstream msg;
    msg << "transported endomorphism lost g-skewness (defect " << defect << ")";
    throw NumericalError(msg.str());
  }
  return e;
}

}  // namespace geoscope
