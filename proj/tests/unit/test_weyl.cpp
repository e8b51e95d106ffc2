#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "geoscope/error.hpp"
#include "geoscope/geometry.hpp"
#include "geoscope/weyl.hpp"
#include "models.hpp"

using namespace geoscope;
using fixtures::load_model;

namespace {

using Pairing = std::vector<std::pair<int, int>>;

/// Every perfect matching of {0, ..., v-1}.
void all_matchings(std::vector<int>& free, Pairing& current, std::vector<Pairing>& out) {
  if (free.empty()) {
    out.push_back(current);
    return;
  }
  const int a = free.front();
  for (std::size_t k = 1; k < free.size(); ++k) {
    const int b = free[k];
    std::vector<int> rest;
    for (std::size_t j = 1; j < free.size(); ++j) {
      if (j != k) rest.push_back(free[j]);
    }
    current.emplace_back(a, b);
    all_matchings(rest, current, out);
    current.pop_back();
  }
}

std::vector<Pairing> all_matchings(int v) {
  std::vector<int> free(v);
  std::iota(free.begin(), free.end(), 0);
  Pairing current;
  std::vector<Pairing> out;
  all_matchings(free, current, out);
  return out;
}

/// Applies a random element of the symmetry group (factor permutation among
/// equal orders, block pair symmetries) by relabeling slots.
TracePattern scramble(const TracePattern& p, std::mt19937& rng) {
  const int v = p.valence();
  std::vector<int> offsets;
  for (int at = 0, i = 0; i < static_cast<int>(p.factors.size()); at += p.factors[i] + 4, ++i) offsets.push_back(at);
  std::vector<int> order(p.factors.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p.factors[a] < p.factors[b]; });
  // order[new position] = old factor; build slot map old -> new
  std::vector<int> map(v);
  int at = 0;
  for (int pos = 0; pos < static_cast<int>(order.size()); ++pos) {
    const int f = order[pos];
    const int m = p.factors[f];
    int curv[4] = {0, 1, 2, 3};
    if (rng() % 2) std::swap(curv[0], curv[1]);
    if (rng() % 2) std::swap(curv[2], curv[3]);
    if (rng() % 2) {
      std::swap(curv[0], curv[2]);
      std::swap(curv[1], curv[3]);
    }
    for (int s = 0; s < m; ++s) map[offsets[f] + s] = at + s;
    for (int s = 0; s < 4; ++s) map[offsets[f] + m + s] = at + m + curv[s];
    at += m + 4;
  }
  TracePattern out{p.factors, {}};
  for (auto [a, b] : p.pairing) {
    int x = map[a], y = map[b];
    if (x > y) std::swap(x, y);
    out.pairing.emplace_back(x, y);
  }
  std::sort(out.pairing.begin(), out.pairing.end());
  return out;
}

double scal_value(const Chart& c, const std::vector<double>& p) {
  const LocalGeometry geo = local_geometry(c, p);
  const TracePattern scal{{0}, {{0, 2}, {1, 3}}};
  return evaluate_invariant(scal, geo.tower, geo.g_inv);
}

/// Metric pulled back along x = A u (coordinates renamed u, v, w).
Chart linear_pullback(const Chart& c, const Eigen::MatrixXd& A) {
  const int n = c.dim();
  const std::vector<std::string> names = {"u", "v", "w"};
  std::vector<std::string> coords(names.begin(), names.begin() + n);
  std::vector<Expr> xs;
  for (int i = 0; i < n; ++i) {
    Expr e = Expr::number(0);
    for (int k = 0; k < n; ++k) e = e + Expr::number(A(i, k)) * Expr::variable(k, coords[k]);
    xs.push_back(e);
  }
  std::vector<Expr> metric(n * n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      Expr e = Expr::number(0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) e = e + Expr::number(A(i, k) * A(j, l)) * substitute(c.metric(i, j), xs);
      metric[k * n + l] = e;
    }
  return Chart(coords, metric);
}

}  // namespace

TEST(EnumeratePatterns, ScalarCurvatureIsTheOnlyLinearTrace) {
  const InvariantSet s = enumerate_patterns(2, 0, 4);
  ASSERT_EQ(s.patterns.size(), 1u);
  EXPECT_EQ(s.patterns[0].factors, std::vector<int>{0});
  EXPECT_EQ(s.patterns[0].descriptor(), "tr[0 | (0,2)(1,3)]");
  // Brute force over the three matchings on four slots: one vanishes, the other two agree up to sign.
  std::mt19937 rng(4);
  const Chart c = fixtures::random_chart(rng, 3);
  const auto p = fixtures::random_point(rng, 3);
  const LocalGeometry geo = local_geometry(c, p);
  std::set<long long> classes;
  for (const auto& m : all_matchings(4)) {
    const double v = evaluate_invariant(TracePattern{{0}, m}, geo.tower, geo.g_inv);
    if (std::abs(v) > 1e-9) classes.insert(std::llround(std::abs(v) * 1e8));
  }
  EXPECT_EQ(classes.size(), 1u);
}

TEST(EnumeratePatterns, QuadraticTracesIncluded) {
  for (int n : {2, 3, 4}) {
    const InvariantSet s = enumerate_patterns(n, 0, 8);
    bool kretschmann = false;
    int quadratic = 0;
    for (const auto& p : s.patterns) {
      if (p.factors == std::vector<int>{0, 0}) ++quadratic;
      if (p.descriptor() == "tr[0,0 | (0,4)(1,5)(2,6)(3,7)]") kretschmann = true;
    }
    EXPECT_TRUE(kretschmann) << n;
    EXPECT_GE(quadratic, 2) << n;
  }
}

TEST(EnumeratePatterns, ParityAndBounds) {
  const InvariantSet s = enumerate_patterns(3, 3, 10);
  EXPECT_EQ(s.max_order, 3);
  EXPECT_EQ(s.max_valence, 10);
  for (const auto& p : s.patterns) {
    EXPECT_EQ(p.valence() % 2, 0);
    EXPECT_LE(p.valence(), 10);
    EXPECT_LE(p.order(), 3);
    EXPECT_NE(p.factors, std::vector<int>{1});
    EXPECT_FALSE(vanishes_identically(p));
  }
  EXPECT_THROW(enumerate_patterns(2, 0, 5), ShapeError);
  EXPECT_THROW(enumerate_patterns(2, -1, 8), ShapeError);
  EXPECT_TRUE(enumerate_patterns(2, 0, 4).patterns.size() == 1);
}

TEST(EnumeratePatterns, DeterministicAndCanonical) {
  const InvariantSet a = enumerate_patterns(3, 2, 8);
  const InvariantSet b = enumerate_patterns(3, 2, 8);
  ASSERT_EQ(a.patterns, b.patterns);
  std::set<TracePattern> seen;
  for (const auto& p : a.patterns) {
    EXPECT_EQ(canonicalize(p), p);
    EXPECT_TRUE(seen.insert(p).second) << "duplicate " << p.descriptor();
  }
  for (std::size_t i = 1; i < a.patterns.size(); ++i) {
    const auto& x = a.patterns[i - 1];
    const auto& y = a.patterns[i];
    EXPECT_LE(std::make_tuple(x.order(), x.valence()), std::make_tuple(y.order(), y.valence()));
  }
}

TEST(EnumeratePatterns, CompleteForQuadraticTraces) {
  // Every matching of two curvature factors is zero or agrees in magnitude
  // with some enumerated pattern on a generic metric.
  std::mt19937 rng(10);
  const Chart c = fixtures::random_chart(rng, 3);
  const auto p = fixtures::random_point(rng, 3);
  const LocalGeometry geo = local_geometry(c, p);
  const InvariantSet s = enumerate_patterns(3, 0, 8);
  std::vector<double> known;
  for (const auto& q : s.patterns) {
    const double v = std::abs(evaluate_invariant(q, geo.tower, geo.g_inv));
    EXPECT_GT(v, 1e-8) << q.descriptor();
    known.push_back(v);
  }
  for (const auto& m : all_matchings(8)) {
    const double v = std::abs(evaluate_invariant(TracePattern{{0, 0}, m}, geo.tower, geo.g_inv));
    if (v < 1e-10) continue;
    bool matched = false;
    for (double k : known) matched = matched || std::abs(v - k) < 1e-9 * std::max(1.0, k);
    if (!matched) {
      const double v1 = std::abs(evaluate_invariant(TracePattern{{0}, {{0, 2}, {1, 3}}}, geo.tower, geo.g_inv));
      matched = std::abs(v - v1 * v1) < 1e-9 * std::max(1.0, v);
    }
    EXPECT_TRUE(matched);
  }
}

TEST(Canonicalize, InvariantUnderSymmetryGroup) {
  std::mt19937 rng(21);
  const InvariantSet s = enumerate_patterns(3, 3, 10);
  for (const auto& p : s.patterns) {
    for (int k = 0; k < 5; ++k) EXPECT_EQ(canonicalize(scramble(p, rng)), p) << p.descriptor();
  }
}

TEST(Canonicalize, PreservesValueUpToSign) {
  std::mt19937 rng(22);
  const Chart c = fixtures::random_chart(rng, 3);
  const auto pt = fixtures::random_point(rng, 3);
  const LocalGeometry geo = local_geometry(c, pt, 2);
  for (const auto& m : all_matchings(6)) {
    const TracePattern p{{2}, m};
    const double a = evaluate_invariant(p, geo.tower, geo.g_inv);
    const double b = evaluate_invariant(canonicalize(p), geo.tower, geo.g_inv);
    EXPECT_NEAR(std::abs(a), std::abs(b), 1e-9 * std::max(1.0, std::abs(a)));
  }
}

TEST(Canonicalize, RejectsMalformedPairings) {
  EXPECT_THROW(canonicalize(TracePattern{{0}, {{0, 1}}}), ShapeError);
  EXPECT_THROW(canonicalize(TracePattern{{0}, {{0, 1}, {1, 2}}}), ShapeError);
  EXPECT_THROW(canonicalize(TracePattern{{0}, {{0, 4}, {1, 2}}}), ShapeError);
  EXPECT_THROW(canonicalize(TracePattern{{1, 0}, {}}), ShapeError);
  EXPECT_TRUE(vanishes_identically(TracePattern{{0}, {{0, 1}, {2, 3}}}));
  EXPECT_FALSE(vanishes_identically(TracePattern{{0}, {{0, 2}, {1, 3}}}));
}

TEST(DefaultMaxOrder, CappedBound) {
  EXPECT_EQ(default_max_order(1), 0);
  EXPECT_EQ(default_max_order(2), 1);
  EXPECT_EQ(default_max_order(3), 3);
  EXPECT_EQ(default_max_order(4), 4);
  EXPECT_EQ(default_max_order(6), 4);
}

TEST(EvaluateInvariant, ConstantCurvatureValues) {
  EXPECT_NEAR(scal_value(load_model("sphere"), {1.1, 0.3}), 2.0, 1e-10);
  EXPECT_NEAR(scal_value(load_model("hyperbolic"), {0.2, 1.4}), -2.0, 1e-10);
  for (const char* flat : {"euclid2", "polar"}) {
    const Chart c = load_model(flat);
    const double p[] = {1.3, 0.4};
    const auto vals = invariant_values(enumerate_patterns(2, 1, 8), c, p);
    for (double v : vals) EXPECT_LT(std::abs(v), 1e-10) << flat;
  }
}

TEST(EvaluateInvariant, InsufficientTowerDepth) {
  const double p[] = {1.0, 0.0};
  const LocalGeometry geo = local_geometry(load_model("sphere"), p, 0);
  const TracePattern needs_two{{2}, {{0, 1}, {2, 4}, {3, 5}}};
  EXPECT_THROW(evaluate_invariant(needs_two, geo.tower, geo.g_inv), ShapeError);
}

TEST(InvariantGradient, HomogeneousChartsAreConstant) {
  std::mt19937 rng(9);
  for (const char* name : {"sphere", "hyperbolic", "sphere3"}) {
    const auto& m = fixtures::model(name);
    const Chart c = load_model(name);
    const auto p = fixtures::sample_point(m, rng);
    const Eigen::MatrixXd grads = invariant_gradients(enumerate_patterns(m.dim, default_max_order(m.dim)), c, p);
    EXPECT_LT(grads.cwiseAbs().maxCoeff(), 1e-9) << name;
  }
}

TEST(InvariantGradient, BumpScalarCurvature) {
  const double p[] = {1.0, 0.0};
  const TracePattern scal{{0}, {{0, 2}, {1, 3}}};
  const auto g = invariant_gradient(scal, load_model("bump"), p);
  // scal = -4 / (1 + x^2), d/dx = 8x / (1 + x^2)^2
  EXPECT_NEAR(g[0], 2.0, 1e-10);
  EXPECT_NEAR(g[1], 0.0, 1e-12);
}

TEST(InvariantGradient, MatchesFiniteDifferences) {
  std::mt19937 rng(15);
  auto check = [&](const Chart& c, const std::vector<double>& p) {
    const InvariantSet s = enumerate_patterns(c.dim(), default_max_order(c.dim()), 8);
    const Eigen::MatrixXd grads = invariant_gradients(s, c, p);
    const double h = 1e-4;
    for (int i = 0; i < c.dim(); ++i) {
      auto up = p, down = p;
      up[i] += h;
      down[i] -= h;
      const auto vu = invariant_values(s, c, up);
      const auto vd = invariant_values(s, c, down);
      for (std::size_t k = 0; k < s.patterns.size(); ++k) {
        const double fd = (vu[k] - vd[k]) / (2 * h);
        EXPECT_NEAR(grads(static_cast<Eigen::Index>(k), i), fd, 1e-6 * std::max(1.0, std::abs(fd)))
            << s.patterns[k].descriptor();
      }
    }
  };
  for (int t = 0; t < 3; ++t) check(load_model("bump"), fixtures::sample_point(fixtures::model("bump"), rng));
  for (int t = 0; t < 2; ++t) check(fixtures::random_chart(rng, 2), fixtures::random_point(rng, 2));
  check(fixtures::random_chart(rng, 3), fixtures::random_point(rng, 3, 0.5));
}

TEST(InvariantProperties, IsometryInvariance) {
  std::mt19937 rng(33);
  for (int t = 0; t < 4; ++t) {
    const int n = 2 + t % 2;
    const Chart c = fixtures::random_chart(rng, n);
    Eigen::MatrixXd A = Eigen::MatrixXd::Random(n, n) * 0.3 + Eigen::MatrixXd::Identity(n, n);
    const Chart pulled = linear_pullback(c, A);
    const auto x = fixtures::random_point(rng, n, 0.5);
    const Eigen::VectorXd u = A.lu().solve(fixtures::vec(x));
    const std::vector<double> uv(u.data(), u.data() + n);
    const InvariantSet s = enumerate_patterns(n, default_max_order(n), 8);
    const auto a = invariant_values(s, c, x);
    const auto b = invariant_values(s, pulled, uv);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-9 * std::max(1.0, std::abs(a[k])));
  }
}

TEST(InvariantProperties, DuplicateFreeOnRandomMetrics) {
  std::mt19937 rng(34);
  const InvariantSet s = enumerate_patterns(2, 1, 8);
  std::set<std::string> names;
  for (const auto& p : s.patterns) EXPECT_TRUE(names.insert(p.descriptor()).second);
  for (int t = 0; t < 5; ++t) {
    const Chart c = fixtures::random_chart(rng, 2);
    const auto vals = invariant_values(s, c, fixtures::random_point(rng, 2));
    EXPECT_EQ(vals.size(), s.patterns.size());
    for (double v : vals) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(InvariantProperties, RedundancyDoesNotChangeRank) {
  std::mt19937 rng(35);
  const InvariantSet base = enumerate_patterns(3, 1, 8);
  const InvariantSet wide = enumerate_patterns(3, 1, 10);
  for (int t = 0; t < 3; ++t) {
    const Chart c = fixtures::random_chart(rng, 3);
    const auto p = fixtures::random_point(rng, 3, 0.5);
    const int r0 = cohomogeneity_at(c, p, base).codim;
    for (std::size_t k = 0; k < wide.patterns.size(); k += 7) {
      InvariantSet extended = base;
      extended.patterns.push_back(wide.patterns[k]);
      EXPECT_EQ(cohomogeneity_at(c, p, extended).codim, r0);
    }
  }
  const double bp[] = {0.8, 0.3};
  InvariantSet bump_set = enumerate_patterns(2, 1, 8);
  const int rb = cohomogeneity_at(load_model("bump"), bp, bump_set).codim;
  bump_set.patterns.push_back(enumerate_patterns(2, 0, 12).patterns.back());
  EXPECT_EQ(cohomogeneity_at(load_model("bump"), bp, bump_set).codim, rb);
}

TEST(Cohomogeneity, ModelCharts) {
  const double e[] = {0.4, -0.2};
  const double s[] = {1.0, 2.0};
  const double b[] = {1.0, 0.0};
  const InvariantSet set = enumerate_patterns(2, 1, 8);
  EXPECT_EQ(cohomogeneity_at(load_model("euclid2"), e, set).codim, 0);
  EXPECT_EQ(cohomogeneity_at(load_model("sphere"), s, set).codim, 0);
  const auto r = cohomogeneity_at(load_model("bump"), b, set);
  EXPECT_EQ(r.codim, 1);
  EXPECT_EQ(r.generic_codim, 1);
  EXPECT_FALSE(r.singular);
  EXPECT_FALSE(r.rank_basis.empty());
  EXPECT_FALSE(r.singular_values.empty());
}

TEST(Cohomogeneity, SymmetryLineOfBumpIsSingular) {
  const double p[] = {0.0, 0.5};
  const auto r = cohomogeneity_at(load_model("bump"), p, enumerate_patterns(2, 1, 8));
  EXPECT_EQ(r.codim, 0);
  EXPECT_EQ(r.generic_codim, 1);
  EXPECT_TRUE(r.singular);
}
