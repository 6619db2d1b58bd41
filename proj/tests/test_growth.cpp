#include <gtest/gtest.h>

#include <boost/rational.hpp>
#include <cmath>
#include <numeric>

#include "cocycle_lab/bundle.hpp"
#include "cocycle_lab/growth.hpp"
#include "cocycle_lab/verify.hpp"

using namespace cocycle_lab;
using Q = boost::rational<long long>;

namespace {

// sup over |k| ≤ K of |Σ f| along the rotation orbit of x, walking k steps
// forward (k > 0) or backward (k < 0) from x; computed exactly.
Q rotation_sup(const std::vector<Q>& f, std::size_t x, long K) {
  const long n = static_cast<long>(f.size());
  Q best(0), fwd(0), bwd(0);
  for (long k = 1; k <= K; ++k) {
    fwd += f[static_cast<std::size_t>((static_cast<long>(x) + k - 1) % n)];
    bwd += f[static_cast<std::size_t>(((static_cast<long>(x) - k) % n + n) % n)];
    best = std::max({best, abs(fwd), abs(bwd)});
  }
  return best;
}

double to_double(Q q) { return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator()); }

}  // namespace

TEST(Classify, HandSeries) {
  const auto flat = classify_growth({{1, 2.0}, {2, 2.0}, {4, 2.0}, {8, 2.0}});
  EXPECT_EQ(flat.verdict, GrowthVerdict::bounded);
  EXPECT_EQ(flat.slope_estimate, 0.0);

  const auto line = classify_growth({{10, 3.0}, {20, 6.0}, {40, 12.0}, {80, 24.0}});
  EXPECT_EQ(line.verdict, GrowthVerdict::linear_growth);
  EXPECT_NEAR(line.slope_estimate, 0.3, 1e-12);
  EXPECT_LE(line.fit_error, 1e-12);

  // √K: growing but far from a line
  std::vector<std::pair<long, double>> root;
  for (long k : {1L, 4L, 16L, 64L, 256L, 1024L}) root.emplace_back(k, std::sqrt(static_cast<double>(k)));
  EXPECT_EQ(classify_growth(root).verdict, GrowthVerdict::inconclusive);

  EXPECT_EQ(classify_growth({{0, 5.0}}).verdict, GrowthVerdict::bounded);
  EXPECT_THROW(classify_growth({{4, 1.0}, {2, 1.0}}), DomainError);
}

TEST(Classify, EmptySeries) {
  const auto g = classify_growth({});
  EXPECT_EQ(g.verdict, GrowthVerdict::inconclusive);
  EXPECT_TRUE(g.sup_norm_by_window.empty());
  EXPECT_EQ(emit_csv(g), "K,sup_norm\n");
}

TEST(Classify, VerdictNamesRoundTrip) {
  for (auto v : {GrowthVerdict::bounded, GrowthVerdict::linear_growth, GrowthVerdict::inconclusive})
    EXPECT_EQ(parse_growth_verdict(to_string(v)), v);
  EXPECT_THROW(parse_growth_verdict("sublinear"), DomainError);
}

TEST(Probe, MeanZeroRotationSettlesAtOne) {
  const auto sys = TransformationSystem::rotation(3);
  const std::vector<double> f{1.0, -1.0, 0.0};
  const std::vector<long> windows{3, 6, 12};
  const auto g = boundedness_probe<double>(sys, windows, f, 0);
  EXPECT_EQ(g.verdict, GrowthVerdict::bounded);
  for (const auto& [k, v] : g.sup_norm_by_window) EXPECT_EQ(v, 1.0) << k;
  EXPECT_EQ(emit_csv(g), "K,sup_norm\n3,1\n6,1\n12,1\n");
}

TEST(Probe, OnesOnFiveCycleGrowWithSlopeOne) {
  const auto sys = TransformationSystem::rotation(5);
  const std::vector<double> f(5, 1.0);
  const std::vector<long> windows{5, 10, 20, 40};
  const auto g = boundedness_probe<double>(sys, windows, f, 2);
  EXPECT_EQ(g.verdict, GrowthVerdict::linear_growth);
  for (const auto& [k, v] : g.sup_norm_by_window) EXPECT_EQ(v, static_cast<double>(k));
  EXPECT_NEAR(g.slope_estimate, 1.0, 1e-12);
}

TEST(Probe, MatchesExactSumsOnRotations) {
  Rng rng(2024);
  for (std::size_t n = 2; n <= 12; ++n) {
    std::vector<Q> fq(n);
    for (auto& v : fq) v = Q(static_cast<long long>(rng.below(21)) - 10, 4);
    std::vector<double> f(n);
    std::transform(fq.begin(), fq.end(), f.begin(), to_double);
    const std::vector<long> windows{static_cast<long>(n), 2 * static_cast<long>(n), 4 * static_cast<long>(n)};
    const auto wtg = build_transformation_groupoid(TransformationSystem::rotation(n), windows.back());
    const auto c = birkhoff_cocycle_field(wtg, std::span<const double>(f));
    for (UnitId x = 0; x < n; ++x) {
      const auto g = boundedness_probe<double>(wtg, windows, f, x);
      const auto gc = boundedness_probe(wtg, c, windows, x);
      ASSERT_EQ(g.sup_norm_by_window.size(), windows.size());
      for (std::size_t i = 0; i < windows.size(); ++i) {
        const double want = to_double(rotation_sup(fq, x, windows[i]));
        EXPECT_NEAR(g.sup_norm_by_window[i].second, want, 1e-12) << n << " " << x << " " << windows[i];
        EXPECT_NEAR(gc.sup_norm_by_window[i].second, want, 1e-12);
      }
    }
  }
}

TEST(Probe, SeriesIsMonotone) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + rng.below(9);
    std::vector<double> f(n);
    for (auto& v : f) v = rng.uniform(-1.0, 1.0);
    const std::vector<long> windows{1, 3, 7, 15, 31};
    const auto wtg = build_transformation_groupoid(TransformationSystem::rotation(n), 31);
    const auto c = birkhoff_cocycle_field(wtg, std::span<const double>(f));
    const auto g = global_growth(wtg, c, windows);
    for (std::size_t i = 1; i < g.sup_norm_by_window.size(); ++i)
      EXPECT_GE(g.sup_norm_by_window[i].second, g.sup_norm_by_window[i - 1].second);
  }
}

TEST(Probe, NonzeroMeanSlope) {
  Rng rng(41);
  for (double mu : {0.1, 0.3, 1.0})
    for (std::size_t n : {10u, 100u}) {
      // f = h − h∘T + μ with |h| ≤ μ/2: the remainder h(x) − h(T^k x) then
      // moves the least-squares slope by at most 0.0157·2μ
      std::vector<double> h(n), f(n);
      for (auto& v : h) v = rng.uniform(-0.5 * mu, 0.5 * mu);
      for (std::size_t x = 0; x < n; ++x) f[x] = h[x] - h[(x + 1) % n] + mu;
      const std::vector<long> windows{10, 20, 40, 80};
      const auto g = boundedness_probe<double>(TransformationSystem::rotation(n), windows, f, 0);
      EXPECT_EQ(g.verdict, GrowthVerdict::linear_growth) << mu << " " << n;
      EXPECT_NEAR(g.slope_estimate, mu, 0.05 * mu) << mu << " " << n;
    }
}

TEST(Probe, WindowErrors) {
  const auto wtg = build_transformation_groupoid(TransformationSystem::rotation(3), 6);
  const std::vector<double> f{1.0, -1.0, 0.0};
  EXPECT_THROW(boundedness_probe<double>(wtg, std::vector<long>{}, f, 0), DomainError);
  EXPECT_THROW(boundedness_probe<double>(wtg, std::vector<long>{3, 2}, f, 0), DomainError);
  EXPECT_THROW(boundedness_probe<double>(wtg, std::vector<long>{3, 12}, f, 0), DomainError);
}

TEST(Probe, FiniteFibersAreBounded) {
  const auto g = pair_groupoid(3);
  Cocycle<double> c{std::vector<Vec<double>>(g.n_arrows(), Vec<double>::Constant(1, 2.0))};
  const auto gr = finite_fiber_growth(g, c, 1);
  EXPECT_EQ(gr.verdict, GrowthVerdict::bounded);
  EXPECT_EQ(gr.sup_norm_by_window, (std::vector<std::pair<long, double>>{{0, 2.0}}));
}
