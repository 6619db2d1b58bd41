#include <gtest/gtest.h>

#include <boost/rational.hpp>
#include <complex>

#include "cocycle_lab/bundle.hpp"
#include "cocycle_lab/generate.hpp"
#include "cocycle_lab/solvers.hpp"

using namespace cocycle_lab;
using cd = std::complex<double>;
using Q = boost::rational<long long>;

namespace {

template <Scalar S>
double recomputed_residual(const FiniteGroupoid& g, const IsometricAction<S>& l, const Cocycle<S>& c,
                           const Section<S>& f) {
  double worst = 0.0;
  for (ArrowId a = 0; a < g.n_arrows(); ++a) {
    const Vec<S> df = f(g.rng(a)) - l(a) * f(g.src(a));
    worst = std::max(worst, (df - c(a)).norm());
  }
  return worst;
}

}  // namespace

TEST(Center, ZeroCocycle) {
  const auto g = pair_times_cyclic(3, 2);
  const auto e = HilbertBundle::constant(3, 2);
  const auto l = IsometricAction<double>::trivial(g, e);
  const auto rep = solve_by_center(g, e, l, Cocycle<double>::zero(g, e));
  EXPECT_EQ(rep.max_residual, 0.0);
  for (const auto& v : rep.section.values) EXPECT_EQ(v.norm(), 0.0);
  EXPECT_FALSE(rep.not_minimal);
}

TEST(Center, GeneratedCoboundaries) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    GenParams p;
    p.units = 1 + seed % 8;
    p.dim = 1 + seed % 4;
    p.field = seed % 3 == 0 ? Field::complex : Field::real;
    const auto sc = gen_scenario(seed, GenKind::minimal_groupoid, p);
    const auto& g = std::get<FiniteGroupoid>(sc.groupoid);
    std::visit(
        [&](const auto& m) {
          const auto rep = solve_by_center(g, sc.bundle, m.action, m.cocycle);
          EXPECT_LE(rep.max_residual, 1e-7) << seed;
          EXPECT_NEAR(recomputed_residual(g, m.action, m.cocycle, rep.section), rep.max_residual, 1e-12);
          const auto lsq = solve_least_squares(g, sc.bundle, m.action, m.cocycle);
          EXPECT_LE(lsq.max_residual, 1e-9) << seed;
          const auto dc = coboundary(g, m.action, rep.section);
          const auto dl = coboundary(g, m.action, lsq.section);
          for (ArrowId a = 0; a < g.n_arrows(); ++a) EXPECT_LE((dc(a) - dl(a)).norm(), 1e-6);
        },
        sc.model);
  }
}

TEST(Center, RejectsNonCocycles) {
  GenParams p;
  p.units = 3;
  const auto sc = gen_scenario(1, GenKind::perturbed, p);
  const auto& g = std::get<FiniteGroupoid>(sc.groupoid);
  const auto& m = std::get<Model<double>>(sc.model);
  EXPECT_THROW(solve_by_center(g, sc.bundle, m.action, m.cocycle), CocycleDefect);
  try {
    solve_by_center(g, sc.bundle, m.action, m.cocycle);
  } catch (const CocycleDefect& ex) {
    EXPECT_GE(ex.defect(), 0.5 - 1e-12);
  }
}

TEST(Center, NonMinimalIsSolvedPerOrbit) {
  const auto g = disjoint_union(pair_groupoid(2), pair_times_cyclic(3, 2));
  const auto e = HilbertBundle::constant(5, 2);
  const auto l = IsometricAction<double>::trivial(g, e);
  Rng rng(9);
  const auto c = coboundary(g, l, Section<double>::random(e, rng));
  const auto rep = solve_by_center(g, e, l, c);
  EXPECT_TRUE(rep.not_minimal);
  EXPECT_LE(rep.max_residual, 1e-12);
}

TEST(Center, WindowedNonzeroMeanDoesNotSettle) {
  // single point, T = id: arrows (0, k, 0) with c = k·μ
  const TransformationSystem sys({0});
  const std::vector<double> f{0.7};
  double previous = 0.0;
  for (long K : {2L, 4L, 8L, 16L}) {
    const auto g = build_transformation_groupoid(sys, K);
    const auto e = HilbertBundle::constant(1, 1);
    const auto c = birkhoff_cocycle_field(g, std::span<const double>(f));
    const auto rep = solve_by_center(g, e, IsometricAction<double>::trivial(g, e), c);
    EXPECT_GT(rep.max_residual, previous);
    // radius of {kμ : |k| ≤ K}
    EXPECT_NEAR(rep.per_fiber_radii[0], 0.7 * static_cast<double>(K), 1e-12);
    previous = rep.max_residual;
  }
}

TEST(LeastSquares, ZeroCocycleGivesZeroSection) {
  const auto g = pair_times_cyclic(3, 1);
  const auto e = HilbertBundle::constant(3, 2);
  const auto rep = solve_least_squares(g, e, IsometricAction<double>::trivial(g, e), Cocycle<double>::zero(g, e));
  for (const auto& v : rep.section.values) EXPECT_EQ(v.norm(), 0.0);
  // invariant sections of the trivial action: constants
  EXPECT_EQ(rep.gauge_dim, 2u);
}

TEST(LeastSquares, GaugeOfReflection) {
  const auto z2 = cyclic_group(2);
  const auto e = HilbertBundle::constant(1, 1);
  Mat<double> one(1, 1), minus(1, 1);
  one << 1;
  minus << -1;
  const IsometricAction<double> refl{{one, minus}};
  const auto rep = solve_least_squares(z2, e, refl, Cocycle<double>::zero(z2, e));
  EXPECT_EQ(rep.gauge_dim, 0u);
}

TEST(LeastSquares, PerturbedResidualIsPositiveAndRepeatable) {
  GenParams p;
  p.units = 4;
  p.dim = 3;
  const auto sc = gen_scenario(5, GenKind::perturbed, p);
  const auto& g = std::get<FiniteGroupoid>(sc.groupoid);
  const auto& m = std::get<Model<double>>(sc.model);
  const auto a = solve_least_squares(g, sc.bundle, m.action, m.cocycle);
  const auto b = solve_least_squares(g, sc.bundle, m.action, m.cocycle);
  EXPECT_GT(a.max_residual, 0.0);
  EXPECT_EQ(a.max_residual, b.max_residual);
  for (UnitId x = 0; x < g.n_units(); ++x) EXPECT_EQ(a.section(x), b.section(x));
}

TEST(Transfer, ZeroPotential) {
  const std::vector<Q> f(6, Q(0));
  for (const auto& v : solve_transfer_function<Q>(TransformationSystem::rotation(6), f)) EXPECT_EQ(v, Q(0));
}

TEST(Transfer, RecoversHUpToAConstant) {
  Rng rng(77);
  for (std::size_t n = 2; n <= 20; ++n) {
    const auto sys = TransformationSystem::rotation(n);
    std::vector<Q> h(n), f(n);
    for (auto& v : h) v = Q(static_cast<long long>(rng.below(41)) - 20, 1 + static_cast<long long>(rng.below(9)));
    for (UnitId x = 0; x < n; ++x) f[x] = h[x] - h[sys(x)];
    const auto g = solve_transfer_function<Q>(sys, f);
    for (UnitId x = 0; x < n; ++x) {
      EXPECT_EQ(g[x] - h[x], g[0] - h[0]);
      EXPECT_EQ(g[x] - g[sys(x)], f[x]);
    }
  }
}

TEST(Transfer, OnesOnFiveCycle) {
  const std::vector<Q> f(5, Q(1));
  try {
    solve_transfer_function<Q>(TransformationSystem::rotation(5), f);
    FAIL() << "expected NotACoboundary";
  } catch (const NotACoboundary& ex) {
    EXPECT_EQ(ex.cycle_sum(), 5.0);
  }
}

TEST(Transfer, NonInjectiveMaps) {
  // cycle 0 -> 1 -> 0 with trees 2 -> 0, 3 -> 2, 4 -> 1
  const TransformationSystem sys({1, 0, 0, 2, 1});
  std::vector<Q> f{Q(3, 2), Q(-3, 2), Q(5), Q(-1, 3), Q(7, 4)};
  const auto g = solve_transfer_function<Q>(sys, f);
  for (UnitId x = 0; x < 5; ++x) EXPECT_EQ(g[x] - g[sys(x)], f[x]);
  f[1] = Q(0);
  EXPECT_THROW(solve_transfer_function<Q>(sys, f), NotACoboundary);
}

TEST(Transfer, FloatAndComplexReports) {
  const auto sys = TransformationSystem::rotation(4);
  const std::vector<double> f{0.25, -1.0, 0.5, 0.25};
  const auto rep = solve_transfer_report<double>(sys, f);
  EXPECT_LE(rep.max_residual, 1e-15);
  const std::vector<cd> fc{{1, 1}, {-1, 0}, {0, -2}, {0, 1}};
  EXPECT_LE(solve_transfer_report<cd>(sys, fc).max_residual, 1e-15);
  EXPECT_THROW(solve_transfer_function<double>(sys, std::vector<double>{1, 1}), ShapeMismatch);
}
