#include "geoscope/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "geoscope/error.hpp"

namespace geoscope {

Tensor values(const JetTensor& t) {
  Tensor out(t.dim(), t.signature());
  for (std::size_t f = 0; f < t.size(); ++f) out[f] = t[f].value();
  return out;
}

JetTensor truncated(const JetTensor& t, int order) {
  JetTensor out(t.dim(), t.signature());
  for (std::size_t f = 0; f < t.size(); ++f) out[f] = t[f].truncated(order);
  return out;
}

namespace {

bool is_zero(const Jet& j) {
  for (double c : j.coefficients()) {
    if (c != 0.0) return false;
  }
  return true;
}

std::string format_point(std::span<const double> point) {
  std::ostringstream out;
  out.precision(17);
  out << "(";
  for (std::size_t i = 0; i < point.size(); ++i) out << (i ? ", " : "") << point[i];
  out << ")";
  return out.str();
}

}  // namespace

JetTensor metric_at(const Chart& chart, std::span<const double> point, int order) {
  const int n = chart.dim();
  if (static_cast<int>(point.size()) != n) throw ShapeError("point dimension does not match the chart");
  if (!chart.in_domain(point)) {
    throw DomainError("point " + format_point(point) + " lies outside the chart domain", point[0]);
  }
  JetTensor g(n, lower_slots(2));
  Eigen::MatrixXd value(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      g({i, j}) = evaluate(chart.metric(i, j), point, order);
      g({j, i}) = g({i, j});
      value(i, j) = value(j, i) = g({i, j}).value();
    }
  }
  if (!value.allFinite()) {
    throw NumericalError("metric is not finite at " + format_point(point));
  }
  const double smallest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(value, Eigen::EigenvaluesOnly)
                              .eigenvalues()
                              .minCoeff();
  if (!(smallest > kPositiveDefiniteTol)) {
    std::ostringstream msg;
    msg << "metric is not positive definite at " << format_point(point) << " (smallest eigenvalue "
        << smallest << ")";
    throw NumericalError(msg.str());
  }
  return g;
}

JetTensor invert_metric(const JetTensor& g) {
  const int n = g.dim();
  if (g.rank() != 2) throw ShapeError("metric inversion needs a rank-2 tensor");
  std::vector<Jet> a(g.data().begin(), g.data().end());
  const Jet& sample = g[0];
  std::vector<Jet> inv(n * n, sample.has_layout() ? Jet::constant(0.0, sample.dim(), sample.order()) : Jet());
  for (int i = 0; i < n; ++i) inv[i * n + i] += Jet(1.0);

  for (int col = 0; col < n; ++col) {
    const Jet pivot = a[col * n + col];
    if (std::abs(pivot.value()) < 1e-300) throw NumericalError("metric value part is singular");
    for (int k = 0; k < n; ++k) {
      a[col * n + k] = a[col * n + k] / pivot;
      inv[col * n + k] = inv[col * n + k] / pivot;
    }
    for (int row = 0; row < n; ++row) {
      if (row == col) continue;
      const Jet factor = a[row * n + col];
      if (is_zero(factor)) continue;
      for (int k = 0; k < n; ++k) {
        a[row * n + k] -= factor * a[col * n + k];
        inv[row * n + k] -= factor * inv[col * n + k];
      }
    }
  }
  JetTensor out(n, {Variance::upper, Variance::upper});
  for (int f = 0; f < n * n; ++f) out[f] = inv[f];
  return out;
}

JetTensor christoffel(const JetTensor& g, const JetTensor& g_inv) {
  const int n = g.dim();
  const int order = g[0].order();
  if (order < 1) throw ShapeError("Christoffel symbols need metric jets of order >= 1");
  // dg[l](i, j) = d_l g_ij
  std::vector<JetTensor> dg;
  for (int l = 0; l < n; ++l) {
    JetTensor d(n, lower_slots(2));
    for (std::size_t f = 0; f < g.size(); ++f) d[f] = g[f].derivative(l);
    dg.push_back(std::move(d));
  }
  const JetTensor ginv = truncated(g_inv, order - 1);
  JetTensor gamma(n, {Variance::upper, Variance::lower, Variance::lower});
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      // First-kind symbols [ij, l] = (d_i g_jl + d_j g_il - d_l g_ij) / 2
      std::vector<Jet> first(n);
      for (int l = 0; l < n; ++l) first[l] = (dg[i]({j, l}) + dg[j]({i, l}) - dg[l]({i, j})) * Jet(0.5);
      for (int k = 0; k < n; ++k) {
        Jet acc;
        for (int l = 0; l < n; ++l) {
          if (is_zero(first[l])) continue;
          acc += ginv({k, l}) * first[l];
        }
        if (!acc.has_layout()) acc = Jet::constant(acc.value(), n, order - 1);
        gamma({k, i, j}) = acc;
        gamma({k, j, i}) = acc;
      }
    }
  }
  return gamma;
}

JetTensor christoffel(const Chart& chart, std::span<const double> point, int order) {
  if (order < 1) throw ShapeError("Christoffel symbols need metric jets of order >= 1");
  const JetTensor g = metric_at(chart, point, order);
  return christoffel(g, invert_metric(g));
}

JetTensor riemann(const JetTensor& g, const JetTensor& gamma) {
  const int n = g.dim();
  const int order = gamma[0].order() - 1;
  if (order < 0) throw ShapeError("curvature needs connection jets of order >= 1");
  const JetTensor G = truncated(gamma, order);
  std::vector<bool> zero(G.size());
  for (std::size_t f = 0; f < G.size(); ++f) zero[f] = is_zero(G[f]);
  auto gam = [&](int a, int b, int c) -> const Jet& { return G[(a * n + b) * n + c]; };
  auto gz = [&](int a, int b, int c) -> bool { return zero[(a * n + b) * n + c]; };

  // Mixed R^a_bcd, the d_a component of R(d_c, d_d) d_b.
  JetTensor mixed(n, {Variance::upper, Variance::lower, Variance::lower, Variance::lower});
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        for (int d = 0; d < n; ++d) {
          Jet acc = gamma({a, d, b}).derivative(c) - gamma({a, c, b}).derivative(d);
          for (int e = 0; e < n; ++e) {
            if (!gz(a, c, e) && !gz(e, d, b)) acc += gam(a, c, e) * gam(e, d, b);
            if (!gz(a, d, e) && !gz(e, c, b)) acc -= gam(a, d, e) * gam(e, c, b);
          }
          mixed({a, b, c, d}) = acc;
        }
      }
    }
  }
  // R_abcd = g_ce R^e_dab
  const JetTensor gt = truncated(g, order);
  JetTensor out(n, lower_slots(4));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        for (int d = 0; d < n; ++d) {
          Jet acc = Jet::constant(0.0, n, order);
          for (int e = 0; e < n; ++e) {
            const Jet& m = mixed({e, d, a, b});
            if (is_zero(m) || is_zero(gt({c, e}))) continue;
            acc += gt({c, e}) * m;
          }
          out({a, b, c, d}) = acc;
        }
      }
    }
  }
  return out;
}

JetTensor covariant_derivative(const JetTensor& t, const JetTensor& gamma) {
  const int n = t.dim();
  const int order = t[0].order();
  if (order < 1) throw ShapeError("covariant derivative exhausted the jet order");
  if (gamma.dim() != n) throw ShapeError("connection dimension does not match the tensor");
  const JetTensor G = truncated(gamma, order - 1);
  const JetTensor T = truncated(t, order - 1);
  std::vector<bool> zero(G.size());
  for (std::size_t f = 0; f < G.size(); ++f) zero[f] = is_zero(G[f]);

  std::vector<Variance> sig{Variance::lower};
  sig.insert(sig.end(), t.signature().begin(), t.signature().end());
  JetTensor out(n, sig);
  const int r = t.rank();
  const std::size_t block = t.size();
  for (int e = 0; e < n; ++e) {
    for (std::size_t f = 0; f < block; ++f) {
      Jet val = t[f].derivative(e);
      for (int s = 0; s < r; ++s) {
        const int i = t.digit(f, s);
        const std::size_t base = f - static_cast<std::size_t>(i) * t.stride(s);
        for (int m = 0; m < n; ++m) {
          const std::size_t src = base + static_cast<std::size_t>(m) * t.stride(s);
          if (t.signature()[s] == Variance::lower) {
            const std::size_t gi = (m * n + e) * n + i;  // Gamma^m_{e i}
            if (!zero[gi]) val -= G[gi] * T[src];
          } else {
            const std::size_t gi = (i * n + e) * n + m;  // Gamma^i_{e m}
            if (!zero[gi]) val += G[gi] * T[src];
          }
        }
      }
      out[e * block + f] = std::move(val);
    }
  }
  return out;
}

JetTower curvature_tower_jets(const Chart& chart, std::span<const double> point, int s_max, int extra_order) {
  if (s_max < 0 || extra_order < 0) throw ShapeError("tower depth and extra order must be non-negative");
  const int order = s_max + 2 + extra_order;
  JetTower out;
  out.g = metric_at(chart, point, order);
  out.g_inv = invert_metric(out.g);
  out.gamma = christoffel(out.g, out.g_inv);
  out.tower.push_back(riemann(out.g, out.gamma));
  for (int s = 1; s <= s_max; ++s) out.tower.push_back(covariant_derivative(out.tower.back(), out.gamma));
  return out;
}

std::vector<Tensor> curvature_tower(const Chart& chart, std::span<const double> point, int s_max) {
  const JetTower jets = curvature_tower_jets(chart, point, s_max, 0);
  std::vector<Tensor> out;
  for (const auto& t : jets.tower) out.push_back(values(t));
  return out;
}

LocalGeometry local_geometry(const Chart& chart, std::span<const double> point, int s_max) {
  const JetTower jets = curvature_tower_jets(chart, point, s_max, 0);
  LocalGeometry out{values(jets.g), values(jets.g_inv), values(jets.gamma), {}};
  for (const auto& t : jets.tower) out.tower.push_back(values(t));
  return out;
}

}  // namespace geoscope
