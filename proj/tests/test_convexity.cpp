#include <gtest/gtest.h>

#include <complex>

#include "cocycle_lab/convexity.hpp"
#include "cocycle_lab/scenario.hpp"

using namespace cocycle_lab;
using cd = std::complex<double>;

namespace {

UnitMetric circle(std::size_t n, double w) {
  UnitMetric m{n, {}};
  for (UnitId x = 0; x < n; ++x) m.edges.push_back({x, static_cast<UnitId>((x + 1) % n), w});
  return m;
}

Section<double> scalar_section(const std::vector<double>& v) {
  Section<double> f;
  for (double x : v) f.values.push_back(Vec<double>::Constant(1, x));
  return f;
}

template <Scalar S>
Vec<S> in_ball(Rng& rng, Eigen::Index d) {
  Vec<S> v = rng.vector<S>(d);
  const double n = v.norm();
  if (n > 0.0) v *= rng.uniform() / n;
  return v;
}

}  // namespace

TEST(Convexity, DeltaEndpoints) {
  EXPECT_EQ(uniform_convexity_delta(0.0), 0.0);
  EXPECT_EQ(uniform_convexity_delta(2.0), 1.0);
  EXPECT_NEAR(uniform_convexity_delta(1.0), 1.0 - std::sqrt(0.75), 1e-15);
  EXPECT_THROW(uniform_convexity_delta(-0.1), DomainError);
  EXPECT_THROW(uniform_convexity_delta(2.5), DomainError);
}

TEST(Convexity, AntipodalAndSphereEquality) {
  Vec<double> u(2);
  u << 0.6, 0.8;
  EXPECT_TRUE(midpoint_check<double>(u, -u, 0.0));
  // on the sphere ‖(u+v)/2‖² = 1 − ε²/4: equality, so no slack is needed beyond roundoff
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const Vec<double> a = rng.vector<double>(3).normalized(), b = rng.vector<double>(3).normalized();
    const double lhs = (0.5 * (a + b)).norm();
    EXPECT_NEAR(lhs, 1.0 - uniform_convexity_delta((a - b).norm()), 1e-12);
  }
}

TEST(Convexity, RandomSamples) {
  Rng rng(10);
  for (int t = 0; t < 10000; ++t) {
    const auto d = static_cast<Eigen::Index>(1 + rng.below(6));
    if (t % 2 == 0) {
      EXPECT_TRUE(midpoint_check<double>(in_ball<double>(rng, d), in_ball<double>(rng, d))) << t;
    } else {
      EXPECT_TRUE(midpoint_check<cd>(in_ball<cd>(rng, d), in_ball<cd>(rng, d))) << t;
    }
  }
}

TEST(Convexity, MidpointInputErrors) {
  EXPECT_THROW(midpoint_check<double>(Vec<double>::Zero(2), Vec<double>::Zero(3)), ShapeMismatch);
  EXPECT_THROW(midpoint_check<double>(Vec<double>::Constant(1, 2.0), Vec<double>::Zero(1)), DomainError);
}

TEST(Modulus, ConstantSectionIsZero) {
  const auto w = modulus_of_continuity_estimate(scalar_section(std::vector<double>(8, 3.5)), circle(8, 0.125), 1.0);
  for (double v : w) EXPECT_EQ(v, 0.0);
}

TEST(Modulus, LinearRampOnCircle) {
  std::vector<double> v;
  for (int x = 0; x < 8; ++x) v.push_back(x / 8.0);
  const auto w = modulus_of_continuity_estimate(scalar_section(v), circle(8, 0.125), 0.125);
  // neighbours differ by 1/8 except across the seam between 7 and 0
  const std::vector<double> want{0.875, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.875};
  for (std::size_t x = 0; x < 8; ++x) EXPECT_DOUBLE_EQ(w[x], want[x]) << x;
}

TEST(Modulus, StepOnCircle8Scenario) {
  const auto sc = load_scenario(COCYCLE_LAB_SCENARIO_DIR "/circle8_step.scn");
  ASSERT_TRUE(sc.metric.has_value());
  const auto step = scalar_section({0, 0, 0, 0, 1, 1, 1, 1});
  const auto w = modulus_of_continuity_estimate(step, sc.metric, 0.125);
  const std::vector<double> want{1, 0, 0, 1, 1, 0, 0, 1};
  for (std::size_t x = 0; x < 8; ++x) EXPECT_EQ(w[x], want[x]) << x;
  // radius 0: every point sees only itself
  for (double v : modulus_of_continuity_estimate(step, sc.metric, 0.0)) EXPECT_EQ(v, 0.0);
}

TEST(Modulus, Errors) {
  const auto f = scalar_section({0, 1});
  EXPECT_THROW(modulus_of_continuity_estimate(f, std::nullopt, 1.0), NoMetric);
  EXPECT_THROW(modulus_of_continuity_estimate(f, circle(3, 1.0), 1.0), ShapeMismatch);
  UnitMetric bad{2, {{0, 5, 1.0}}};
  EXPECT_THROW(modulus_of_continuity_estimate(f, bad, 1.0), ValidationError);
}
