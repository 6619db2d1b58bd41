#include <gtest/gtest.h>

#include <filesystem>

#include "cocycle_lab/generate.hpp"
#include "cocycle_lab/verify.hpp"

using namespace cocycle_lab;

namespace {

Scenario shipped(const std::string& name) {
  return load_scenario(std::string(COCYCLE_LAB_SCENARIO_DIR) + "/" + name + ".scn");
}

}  // namespace

TEST(Verify, GeneratedCoboundariesAreConsistent) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    GenParams p;
    p.units = 1 + seed % 6;
    p.dim = 1 + seed % 4;
    p.field = seed % 5 == 0 ? Field::complex : Field::real;
    const auto r = run_verify(gen_scenario(seed, GenKind::minimal_groupoid, p));
    EXPECT_EQ(r.verdict, "consistent") << seed << "\n" << r.details;
    EXPECT_TRUE(r.coboundary);
    EXPECT_TRUE(r.bounded_global);
    ASSERT_NE(r.solver("center"), nullptr);
    ASSERT_NE(r.solver("lsq"), nullptr);
    EXPECT_LE(r.solver("center")->max_residual, 1e-7);
    EXPECT_LE(r.solver("lsq")->max_residual, 1e-7);
    ASSERT_TRUE(r.solver_agreement.has_value());
    EXPECT_LE(*r.solver_agreement, 1e-6);
    EXPECT_EQ(exit_code(r), 0);
  }
}

TEST(Verify, NonzeroMeanIsUnboundedEverywhere) {
  const auto r = run_verify(shipped("rot5_ones"));
  EXPECT_EQ(r.verdict, "consistent");
  EXPECT_FALSE(r.coboundary);
  EXPECT_FALSE(r.bounded_some_base);
  EXPECT_FALSE(r.bounded_global);
  ASSERT_EQ(r.base_units.size(), 5u);
  for (const auto& u : r.base_units) EXPECT_EQ(u.growth.verdict, GrowthVerdict::linear_growth);
  const auto* t = r.solver("transfer");
  ASSERT_NE(t, nullptr);
  EXPECT_FALSE(t->ok);
  ASSERT_TRUE(t->cycle_sum.has_value());
  EXPECT_EQ(*t->cycle_sum, 5.0);
}

TEST(Verify, NonMinimalReportsOrbits) {
  const auto r = run_verify(shipped("two_cycles"));
  EXPECT_EQ(r.verdict, "not_minimal");
  EXPECT_FALSE(r.minimal);
  EXPECT_FALSE(r.warnings.empty());
  ASSERT_EQ(r.orbits.size(), 2u);
  EXPECT_EQ(r.orbits[0].units, (std::vector<UnitId>{0, 1}));
  EXPECT_EQ(r.orbits[1].units, (std::vector<UnitId>{2, 3, 4}));
  EXPECT_TRUE(r.orbits[0].coboundary);
  EXPECT_TRUE(r.orbits[0].bounded_every_base);
  EXPECT_FALSE(r.orbits[1].coboundary);
  EXPECT_FALSE(r.orbits[1].bounded_some_base);
  EXPECT_TRUE(r.orbits[0].consistent && r.orbits[1].consistent);
  EXPECT_EQ(exit_code(r), 0);
}

TEST(Verify, PerturbedNeverClaimsACoboundary) {
  const auto r = run_verify(shipped("perturbed3_z3"));
  EXPECT_EQ(r.verdict, "hypotheses_not_met");
  EXPECT_FALSE(r.cocycle_valid);
  EXPECT_FALSE(r.coboundary);
  EXPECT_EQ(exit_code(r), 1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto rp = run_verify(gen_scenario(seed, GenKind::perturbed));
    EXPECT_GE(rp.cocycle_defect, 0.5 - 1e-12);
    EXPECT_FALSE(rp.coboundary) << seed;
    EXPECT_NE(rp.verdict, "consistent");
  }
}

TEST(Verify, Rot3SettlesAtOne) {
  const auto r = run_verify(shipped("rot3_meanzero"));
  EXPECT_EQ(r.verdict, "consistent");
  EXPECT_EQ(r.n_arrows, 75u);
  EXPECT_TRUE(r.coboundary && r.bounded_some_base && r.bounded_global);
  // partial sums of 1, −1, 0 from unit 0 are 1, 0, 0
  EXPECT_EQ(r.base_units[0].growth.sup_norm_by_window,
            (std::vector<std::pair<long, double>>{{3, 1.0}, {6, 1.0}, {12, 1.0}}));
  EXPECT_EQ(emit_csv(r.base_units[0].growth), "K,sup_norm\n3,1\n6,1\n12,1\n");
}

TEST(Verify, WindowOverride) {
  const auto sc = with_windows(shipped("rot3_meanzero"), {1, 2, 4, 8});
  EXPECT_EQ(sc.n_arrows(), 3u * 17u);
  const auto r = run_verify(sc);
  EXPECT_EQ(r.base_units[0].growth.sup_norm_by_window.size(), 4u);
  EXPECT_THROW(with_windows(sc, {4, 2}), ParamError);
  EXPECT_THROW(with_windows(shipped("trivial"), {1}), ParamError);
}

TEST(Verify, MachineReportRoundTrip) {
  for (const auto& entry : std::filesystem::directory_iterator(COCYCLE_LAB_SCENARIO_DIR)) {
    if (entry.path().extension() != ".scn") continue;
    const auto r = run_verify(load_scenario(entry.path().string()));
    const std::string bytes = emit_machine_report(r);
    const auto back = parse_machine_report(bytes);
    EXPECT_EQ(back, r) << entry.path();
    EXPECT_EQ(emit_machine_report(back), bytes);
    EXPECT_EQ(emit_machine_report(run_verify(load_scenario(entry.path().string()))), bytes);
    EXPECT_FALSE(emit_text_report(r).empty());
  }
  EXPECT_THROW(parse_machine_report("{not json"), ParseError);
  EXPECT_THROW(parse_machine_report("{\"format_version\": 1}"), ParseError);
}
