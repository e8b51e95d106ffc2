#include "geoscope/weyl.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "geoscope/error.hpp"
#include "geoscope/geometry.hpp"

namespace geoscope {

int TracePattern::order() const { return std::accumulate(factors.begin(), factors.end(), 0); }

int TracePattern::valence() const {
  int v = 0;
  for (int m : factors) v += m + 4;
  return v;
}

std::string TracePattern::descriptor() const {
  std::ostringstream out;
  out << "tr[";
  for (std::size_t i = 0; i < factors.size(); ++i) out << (i ? "," : "") << factors[i];
  out << " | ";
  for (const auto& [a, b] : pairing) out << "(" << a << "," << b << ")";
  out << "]";
  return out.str();
}

int default_max_order(int dim) { return std::min(dim * (dim - 1) / 2, 4); }

namespace {

std::vector<int> factor_offsets(const std::vector<int>& factors) {
  std::vector<int> offsets;
  int at = 0;
  for (int m : factors) {
    offsets.push_back(at);
    at += m + 4;
  }
  return offsets;
}

using Pairing = std::vector<std::pair<int, int>>;

Pairing normalized(Pairing p) {
  for (auto& [a, b] : p) {
    if (a > b) std::swap(a, b);
  }
  std::sort(p.begin(), p.end());
  return p;
}

void validate(const TracePattern& p) {
  const int v = p.valence();
  if (!std::is_sorted(p.factors.begin(), p.factors.end())) throw ShapeError("pattern factors must be sorted");
  if (static_cast<int>(p.pairing.size()) * 2 != v) throw ShapeError("pairing does not cover every slot");
  std::vector<int> seen(v, 0);
  for (const auto& [a, b] : p.pairing) {
    if (a < 0 || b < 0 || a >= v || b >= v || a == b) throw ShapeError("pairing slot out of range");
    ++seen[a];
    ++seen[b];
  }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
    throw ShapeError("pairing is not a perfect matching");
  }
}

// The 8 relabelings of a curvature block (a b c d) generated by a<->b, c<->d
// and (ab)<->(cd).
constexpr int kBlockSymmetries[8][4] = {
    {0, 1, 2, 3}, {1, 0, 2, 3}, {0, 1, 3, 2}, {1, 0, 3, 2},
    {2, 3, 0, 1}, {3, 2, 0, 1}, {2, 3, 1, 0}, {3, 2, 1, 0},
};

}  // namespace

TracePattern canonicalize(const TracePattern& p) {
  validate(p);
  const int l = static_cast<int>(p.factors.size());
  const auto offsets = factor_offsets(p.factors);
  const int v = p.valence();

  std::vector<int> perm(l);
  std::iota(perm.begin(), perm.end(), 0);
  Pairing best = normalized(p.pairing);
  std::vector<int> relabel(v);
  std::vector<int> block(l, 0);
  do {
    bool allowed = true;
    for (int i = 0; i < l; ++i) allowed = allowed && p.factors[perm[i]] == p.factors[i];
    if (!allowed) continue;
    // Odometer over the block symmetry of every factor.
    std::fill(block.begin(), block.end(), 0);
    for (;;) {
      for (int i = 0; i < l; ++i) {
        const int m = p.factors[i];
        const int dst = offsets[perm[i]];
        for (int s = 0; s < m; ++s) relabel[offsets[i] + s] = dst + s;
        for (int s = 0; s < 4; ++s) relabel[offsets[i] + m + s] = dst + m + kBlockSymmetries[block[i]][s];
      }
      Pairing image;
      image.reserve(p.pairing.size());
      for (const auto& [a, b] : p.pairing) image.emplace_back(relabel[a], relabel[b]);
      image = normalized(std::move(image));
      if (image < best) best = std::move(image);

      int k = 0;
      while (k < l && ++block[k] == 8) block[k++] = 0;
      if (k == l) break;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return TracePattern{p.factors, best};
}

bool vanishes_identically(const TracePattern& p) {
  const auto offsets = factor_offsets(p.factors);
  for (std::size_t i = 0; i < p.factors.size(); ++i) {
    const int r = offsets[i] + p.factors[i];
    for (auto [a, b] : p.pairing) {
      if (a > b) std::swap(a, b);
      if ((a == r && b == r + 1) || (a == r + 2 && b == r + 3)) return true;
    }
  }
  return false;
}

InvariantSet enumerate_patterns(int dim, int max_order, int max_valence) {
  if (dim < 1) throw ShapeError("dimension must be positive");
  if (max_order < 0) throw ShapeError("max_order must be non-negative");
  if (max_valence < 4 || max_valence % 2 != 0) throw ShapeError("max_valence must be even and >= 4");

  std::set<TracePattern> found;
  std::vector<int> factors;
  Pairing current;

  auto enumerate_matchings = [&](const std::vector<int>& fs) {
    int v = 0;
    for (int m : fs) v += m + 4;
    std::vector<bool> used(v, false);
    auto rec = [&](auto&& self) -> void {
      int first = -1;
      for (int s = 0; s < v; ++s) {
        if (!used[s]) {
          first = s;
          break;
        }
      }
      if (first < 0) {
        TracePattern p{fs, current};
        if (!vanishes_identically(p)) found.insert(canonicalize(p));
        return;
      }
      used[first] = true;
      for (int s = first + 1; s < v; ++s) {
        if (used[s]) continue;
        used[s] = true;
        current.emplace_back(first, s);
        self(self);
        current.pop_back();
        used[s] = false;
      }
      used[first] = false;
    };
    rec(rec);
  };

  auto rec_factors = [&](auto&& self, int min_m, int order_left, int valence_left) -> void {
    if (!factors.empty()) {
      int v = 0;
      for (int m : factors) v += m + 4;
      if (v % 2 == 0) enumerate_matchings(factors);
    }
    for (int m = min_m; m <= order_left && m + 4 <= valence_left; ++m) {
      factors.push_back(m);
      self(self, m, order_left - m, valence_left - m - 4);
      factors.pop_back();
    }
  };
  rec_factors(rec_factors, 0, max_order, max_valence);

  InvariantSet set;
  set.max_order = max_order;
  set.max_valence = max_valence;
  set.patterns.assign(found.begin(), found.end());
  std::stable_sort(set.patterns.begin(), set.patterns.end(), [](const TracePattern& a, const TracePattern& b) {
    if (a.order() != b.order()) return a.order() < b.order();
    if (a.valence() != b.valence()) return a.valence() < b.valence();
    return a < b;
  });
  return set;
}

namespace {

template <class Scalar>
BasicTensor<Scalar> raise_slot(const BasicTensor<Scalar>& t, int slot, const BasicTensor<Scalar>& g_inv) {
  const int n = t.dim();
  auto sig = t.signature();
  sig[slot] = Variance::upper;
  BasicTensor<Scalar> out(n, sig);
  const std::size_t stride = t.stride(slot);
  for (std::size_t f = 0; f < t.size(); ++f) {
    const int b = t.digit(f, slot);
    const std::size_t base = f - static_cast<std::size_t>(b) * stride;
    Scalar acc{};
    for (int a = 0; a < n; ++a) acc += g_inv[b * n + a] * t[base + static_cast<std::size_t>(a) * stride];
    out[f] = acc;
  }
  return out;
}

template <class Scalar>
Scalar contract_pattern(const TracePattern& p, std::span<const BasicTensor<Scalar>> tower,
                        const BasicTensor<Scalar>& g_inv) {
  validate(p);
  const int l = static_cast<int>(p.factors.size());
  for (int m : p.factors) {
    if (m >= static_cast<int>(tower.size())) {
      std::ostringstream msg;
      msg << "pattern " << p.descriptor() << " needs tower depth " << m << ", have " << tower.size() - 1;
      throw ShapeError(msg.str());
    }
  }
  const auto offsets = factor_offsets(p.factors);
  const int v = p.valence();
  std::vector<int> pair_of(v, -1);
  std::vector<bool> raised(v, false);
  for (std::size_t k = 0; k < p.pairing.size(); ++k) {
    pair_of[p.pairing[k].first] = static_cast<int>(k);
    pair_of[p.pairing[k].second] = static_cast<int>(k);
    raised[std::max(p.pairing[k].first, p.pairing[k].second)] = true;
  }

  std::vector<BasicTensor<Scalar>> factors;
  // weights[i][k]: stride contributed to factor i's flat index by pair k.
  std::vector<std::vector<std::size_t>> weights(l, std::vector<std::size_t>(p.pairing.size(), 0));
  for (int i = 0; i < l; ++i) {
    BasicTensor<Scalar> t = tower[p.factors[i]];
    const int r = p.factors[i] + 4;
    for (int s = 0; s < r; ++s) {
      const int global = offsets[i] + s;
      if (raised[global]) t = raise_slot(t, s, g_inv);
      weights[i][pair_of[global]] += t.stride(s);
    }
    factors.push_back(std::move(t));
  }

  const int n = g_inv.dim();
  const int pairs = static_cast<int>(p.pairing.size());
  std::vector<int> idx(pairs, 0);
  std::vector<std::size_t> flat(l, 0);
  Scalar total{};
  for (;;) {
    Scalar term = factors[0][flat[0]];
    for (int i = 1; i < l; ++i) term = term * factors[i][flat[i]];
    total += term;

    int k = 0;
    for (; k < pairs; ++k) {
      if (++idx[k] < n) {
        for (int i = 0; i < l; ++i) flat[i] += weights[i][k];
        break;
      }
      for (int i = 0; i < l; ++i) flat[i] -= weights[i][k] * static_cast<std::size_t>(n - 1);
      idx[k] = 0;
    }
    if (k == pairs) break;
  }
  return total;
}

int tower_depth_needed(const InvariantSet& set) {
  int depth = 0;
  for (const auto& p : set.patterns) {
    for (int m : p.factors) depth = std::max(depth, m);
  }
  return depth;
}

}  // namespace

double evaluate_invariant(const TracePattern& p, std::span<const Tensor> tower, const Tensor& g_inv) {
  return contract_pattern<double>(p, tower, g_inv);
}

Jet evaluate_invariant(const TracePattern& p, std::span<const JetTensor> tower, const JetTensor& g_inv) {
  return contract_pattern<Jet>(p, tower, g_inv);
}

std::vector<double> invariant_values(const InvariantSet& set, const Chart& chart, std::span<const double> point) {
  const LocalGeometry geo = local_geometry(chart, point, tower_depth_needed(set));
  std::vector<double> out;
  out.reserve(set.patterns.size());
  for (const auto& p : set.patterns) out.push_back(evaluate_invariant(p, geo.tower, geo.g_inv));
  return out;
}

namespace {

struct GradientTower {
  std::vector<JetTensor> tower;
  JetTensor g_inv;
};

GradientTower gradient_tower(const Chart& chart, std::span<const double> point, int depth) {
  JetTower jets = curvature_tower_jets(chart, point, depth, 1);
  GradientTower out;
  for (const auto& t : jets.tower) out.tower.push_back(truncated(t, 1));
  out.g_inv = truncated(jets.g_inv, 1);
  return out;
}

}  // namespace

std::vector<double> invariant_gradient(const TracePattern& p, const Chart& chart, std::span<const double> point) {
  int depth = 0;
  for (int m : p.factors) depth = std::max(depth, m);
  const GradientTower gt = gradient_tower(chart, point, depth);
  Jet value = evaluate_invariant(p, gt.tower, gt.g_inv);
  std::vector<double> grad = value.gradient();
  grad.resize(chart.dim(), 0.0);
  return grad;
}

Eigen::MatrixXd invariant_gradients(const InvariantSet& set, const Chart& chart, std::span<const double> point) {
  const int n = chart.dim();
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(set.patterns.size()), n);
  if (set.patterns.empty()) return rows;
  const GradientTower gt = gradient_tower(chart, point, tower_depth_needed(set));
  for (std::size_t k = 0; k < set.patterns.size(); ++k) {
    const auto grad = evaluate_invariant(set.patterns[k], gt.tower, gt.g_inv).gradient();
    for (int i = 0; i < n && i < static_cast<int>(grad.size()); ++i) rows(static_cast<Eigen::Index>(k), i) = grad[i];
  }
  return rows;
}

CohomogeneityResult cohomogeneity_at(const Chart& chart, std::span<const double> point, const InvariantSet& set,
                                     double rank_tol, double h_probe) {
  const int n = chart.dim();
  CohomogeneityResult out;
  const Eigen::MatrixXd rows = invariant_gradients(set, chart, point);
  const RankInfo info = numerical_rank(rows, rank_tol);
  out.codim = info.rank;
  out.singular_values = info.singular_values;

  // Greedy basis: keep a pattern when it raises the rank of the kept rows.
  Eigen::MatrixXd kept(0, n);
  for (std::size_t k = 0; k < set.patterns.size() && static_cast<int>(out.rank_basis.size()) < out.codim; ++k) {
    Eigen::MatrixXd trial(kept.rows() + 1, n);
    trial << kept, rows.row(static_cast<Eigen::Index>(k));
    // Use the full matrix's threshold so the basis agrees with codim.
    const auto sv = numerical_rank(trial, rank_tol).singular_values;
    const int r = static_cast<int>(std::count_if(sv.begin(), sv.end(), [&](double s) { return s > info.threshold; }));
    if (r > kept.rows()) {
      kept = trial;
      out.rank_basis.push_back(set.patterns[k]);
    }
  }

  out.generic_codim = out.codim;
  std::vector<double> probe(point.begin(), point.end());
  for (int i = 0; i < n; ++i) {
    for (double sign : {-1.0, 1.0}) {
      probe.assign(point.begin(), point.end());
      probe[i] += sign * h_probe;
      int r = 0;
      try {
        r = numerical_rank(invariant_gradients(set, chart, probe), rank_tol).rank;
      } catch (const DomainError&) {
        continue;
      } catch (const NumericalError&) {
        continue;
      }
      if (r != out.codim) out.singular = true;
      out.generic_codim = std::max(out.generic_codim, r);
    }
  }
  return out;
}

}  // namespace geoscope
