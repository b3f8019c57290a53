#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"

using namespace pairlr;

namespace {

Scenario header_scenario(std::uint64_t n, Target t) {
  return Scenario{"header", fixtures::table2_header(), n, t, std::nullopt};
}

TEST(SampleTable, CellMeansObeyLawOfLargeNumbers) {
  const auto p = fixtures::table2_header();
  const std::uint64_t n = 50;
  const std::size_t draws = 1'000'000;
  Engine rng = make_engine(2024);
  std::array<double, 8> sum{};
  for (std::size_t i = 0; i < draws; ++i) {
    const auto c = sample_table(p, n, rng).cells();
    for (std::size_t k = 0; k < 8; ++k) sum[k] += static_cast<double>(c[k]);
  }
  for (std::size_t k = 0; k < 8; ++k) {
    const double pk = p.cells()[k];
    const double se = std::sqrt(n * pk * (1 - pk) / draws);
    EXPECT_NEAR(sum[k] / draws, n * pk, 3 * se) << "cell " << k;
  }
}

TEST(SampleTable, SingleTrialHasOneSubject) {
  Engine rng = make_engine(1);
  for (int i = 0; i < 100; ++i) {
    const auto c = sample_table(fixtures::table2_header(), 1, rng).cells();
    int ones = 0, zeros = 0;
    for (auto v : c) {
      ones += v == 1;
      zeros += v == 0;
    }
    EXPECT_EQ(ones, 1);
    EXPECT_EQ(zeros, 7);
  }
}

TEST(SampleTable, FixedSeedIsDeterministic) {
  Engine a = make_engine(42), b = make_engine(42);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(sample_table(fixtures::table2_header(), 300, a), sample_table(fixtures::table2_header(), 300, b));
  }
}

TEST(ClassifyFailure, Boundary) {
  EXPECT_TRUE(classify_failure(93.0));
  EXPECT_FALSE(classify_failure(93.01));
  EXPECT_FALSE(classify_failure(100.0));
  EXPECT_TRUE(classify_failure(14.8));
}

TEST(Coverage, AlwaysCoverControlHasFullCoverageAndNoLength) {
  StudyOptions opt;
  opt.replicates = 300;
  opt.seed = 5;
  const std::vector<IntervalProcedure> procs{always_cover_procedure()};
  const CoverageReport r = run_coverage_study(header_scenario(100, Target::OmegaPos), procs, opt);
  ASSERT_EQ(r.methods.size(), 1u);
  EXPECT_DOUBLE_EQ(r.methods[0].cp, 100.0);
  EXPECT_FALSE(r.methods[0].al.has_value());
  EXPECT_FALSE(r.methods[0].fail);
}

TEST(Coverage, ExactReplicatesWithDiscardsCounted) {
  StudyOptions opt;
  opt.replicates = 400;
  opt.seed = 9;
  const std::array<Method, 2> methods{Method::Logarithmic, Method::Wald};
  // n = 50 at 10% prevalence: about 5 diseased subjects, so many draws
  // have Se = 1 and are regenerated.
  const CoverageReport r = run_coverage_study(header_scenario(50, Target::OmegaPos), methods, opt);
  EXPECT_EQ(r.replicates, 400u);
  EXPECT_GT(r.discarded, 0u);
  for (const auto& m : r.methods) {
    EXPECT_EQ(m.replicates, 400u);
    EXPECT_EQ(m.scored + m.invalid_count, 400u);
    EXPECT_GE(m.cp, 0.0);
    EXPECT_LE(m.cp, 100.0);
    EXPECT_EQ(m.fail, m.cp <= 93.0);
  }
}

TEST(Coverage, IndependentOfThreadCount) {
  StudyOptions opt;
  opt.replicates = 200;
  opt.seed = 77;
  opt.bootstrap_B = 50;
  opt.bayes_M = 50;
  const Scenario sc = header_scenario(200, Target::OmegaNeg);
  opt.threads = 1;
  const CoverageReport a = run_coverage_study(sc, std::span<const Method>(kAllMethods), opt);
  opt.threads = 4;
  const CoverageReport b = run_coverage_study(sc, std::span<const Method>(kAllMethods), opt);
  ASSERT_EQ(a.methods.size(), b.methods.size());
  EXPECT_EQ(a.discarded, b.discarded);
  for (std::size_t i = 0; i < a.methods.size(); ++i) {
    EXPECT_EQ(a.methods[i].covered, b.methods[i].covered) << a.methods[i].method;
    EXPECT_EQ(a.methods[i].al, b.methods[i].al) << a.methods[i].method;
  }
}

TEST(Coverage, InvalidIntervalsCountAsMisses) {
  StudyOptions opt;
  opt.replicates = 100;
  opt.seed = 1;
  const std::vector<IntervalProcedure> procs{IntervalProcedure{
      "never", [](const PairedCounts&, Target t, double level, std::uint64_t) {
        IntervalResult r;
        r.target = t;
        r.level = level;
        return r;
      }}};
  const CoverageReport r = run_coverage_study(header_scenario(300, Target::OmegaPos), procs, opt);
  EXPECT_EQ(r.methods[0].cp, 0.0);
  EXPECT_EQ(r.methods[0].invalid_count, 100u);
  EXPECT_FALSE(r.methods[0].al.has_value());
  EXPECT_TRUE(r.methods[0].fail);
}

TEST(Coverage, TrueOmegaComesFromParameters) {
  EXPECT_NEAR(header_scenario(100, Target::OmegaPos).true_omega(), 9.5 / 4.5, 1e-14);
  EXPECT_NEAR(header_scenario(100, Target::OmegaNeg).true_omega(), (0.05 / 0.9) / 0.125, 1e-14);
}

TEST(Coverage, ClosedFormCoverageNearNominalAtLargeN) {
  StudyOptions opt;
  opt.replicates = 1000;
  opt.seed = 31;
  const std::array<Method, 3> methods{Method::Logarithmic, Method::Wald, Method::Fieller};
  const CoverageReport r = run_coverage_study(header_scenario(1000, Target::OmegaPos), methods, opt);
  for (const auto& m : r.methods) {
    // 1000 replicates: binomial SE is about 0.7 points.
    EXPECT_NEAR(m.cp, 95.0, 2.5) << m.method;
  }
}

TEST(Coverage, RejectsZeroReplicates) {
  StudyOptions opt;
  opt.replicates = 0;
  const std::array<Method, 1> methods{Method::Wald};
  EXPECT_THROW(run_coverage_study(header_scenario(100, Target::OmegaPos), methods, opt), Error);
}

MethodCoverage mc(std::string name, double cp, std::optional<double> al) {
  MethodCoverage m;
  m.method = std::move(name);
  m.cp = cp;
  m.al = al;
  m.fail = classify_failure(cp);
  return m;
}

CoverageReport report(std::vector<MethodCoverage> ms) {
  CoverageReport r;
  r.methods = std::move(ms);
  return r;
}

TEST(SelectBest, FewerFailuresDominate) {
  const std::vector<CoverageReport> reps{report({mc("x", 94.0, 2.0), mc("y", 92.0, 0.5)}),
                                         report({mc("x", 95.0, 2.0), mc("y", 96.0, 0.5)})};
  const auto ranked = select_best(reps);
  EXPECT_EQ(ranked[0].method, "x");
  EXPECT_EQ(ranked[0].failures, 0u);
  EXPECT_EQ(ranked[1].failures, 1u);
}

TEST(SelectBest, ShorterThenCloserToNominal) {
  const std::vector<CoverageReport> reps{
      report({mc("a", 99.0, 1.0), mc("b", 95.5, 1.0), mc("c", 96.0, 0.8), mc("d", 100.0, std::nullopt)})};
  const auto ranked = select_best(reps);
  ASSERT_EQ(ranked.size(), 4u);
  EXPECT_EQ(ranked[0].method, "c");
  EXPECT_EQ(ranked[1].method, "b");
  EXPECT_EQ(ranked[2].method, "a");
  EXPECT_EQ(ranked[3].method, "d");
  EXPECT_FALSE(ranked[3].mean_al.has_value());
}

TEST(SelectBest, AveragesAcrossScenarios) {
  const std::vector<CoverageReport> reps{report({mc("a", 94.0, 1.0)}), report({mc("a", 96.0, 3.0)})};
  const auto ranked = select_best(reps);
  EXPECT_DOUBLE_EQ(ranked[0].mean_cp, 95.0);
  EXPECT_DOUBLE_EQ(*ranked[0].mean_al, 2.0);
  EXPECT_THROW(select_best(std::span<const CoverageReport>()), Error);
}

}  // namespace
