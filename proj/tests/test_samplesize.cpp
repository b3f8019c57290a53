#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace pairlr;

namespace {

SampleSizeRequest req(const AccuracyParams& p, Target t, double delta, PrecisionScale s = PrecisionScale::Auto) {
  SampleSizeRequest r;
  r.acc = p.values();
  r.target = t;
  r.delta = delta;
  r.scale = s;
  return r;
}

struct Table6Row {
  double pi, eps1, eps0;
  std::uint64_t n_pos, n_neg;
};

// Sizes for delta' = 0.10 on 1/omega+ and delta = 0.10 on omega-.
constexpr std::array<Table6Row, 6> kTable6{{{0.10, 0.0225, 0.0400, 958, 14439},
                                            {0.25, 0.0225, 0.0400, 1073, 5793},
                                            {0.50, 0.0225, 0.0400, 1571, 2922},
                                            {0.10, 0.0360, 0.0640, 701, 10336},
                                            {0.25, 0.0360, 0.0640, 786, 4147},
                                            {0.50, 0.0360, 0.0640, 1152, 2092}}};

TEST(SampleSizeWald, TableSixSizes) {
  for (const auto& row : kTable6) {
    const auto p = fixtures::table2_header(row.pi, row.eps1, row.eps0);
    EXPECT_EQ(sample_size_wald(req(p, Target::OmegaPos, 0.10)).n, row.n_pos) << row.pi << ' ' << row.eps1;
    EXPECT_EQ(sample_size_wald(req(p, Target::OmegaNeg, 0.10)).n, row.n_neg) << row.pi << ' ' << row.eps1;
  }
}

TEST(SampleSizeWald, ReciprocalConventionScalesDelta) {
  const auto p = fixtures::table2_header();
  const SampleSizeResult r = sample_size_wald(req(p, Target::OmegaPos, 0.10));
  const double w = 9.5 / 4.5;
  EXPECT_NEAR(r.delta_effective, w * w * 0.10, 1e-14);
  const SampleSizeResult d = sample_size_wald(req(p, Target::OmegaPos, w * w * 0.10, PrecisionScale::Direct));
  EXPECT_NEAR(d.n_exact, r.n_exact, 1e-9 * r.n_exact);
  // omega- < 1: auto reads delta on the omega scale.
  EXPECT_NEAR(sample_size_wald(req(p, Target::OmegaNeg, 0.1)).delta_effective, 0.1, 0);
}

TEST(SampleSizeWald, InverseSquareLaw) {
  const auto p = fixtures::table2_header(0.25, 0.036, 0.064);
  for (Target t : {Target::OmegaPos, Target::OmegaNeg}) {
    const double a = sample_size_wald(req(p, t, 0.05)).n_exact;
    const double b = sample_size_wald(req(p, t, 0.10)).n_exact;
    EXPECT_NEAR(a / b, 4.0, 1e-12);
  }
}

TEST(SampleSizeWald, PermutationIdentity) {
  // Sizing omega at delta equals sizing 1/omega (tests swapped) at delta/omega^2.
  const Accuracy a = fixtures::table2_header().values();
  const Accuracy s{a.se2, a.sp2, a.se1, a.sp1, a.prevalence, a.eps1, a.eps0};
  const double w = lr_point_estimates(a, Target::OmegaNeg).omega();
  SampleSizeRequest r1;
  r1.acc = a;
  r1.target = Target::OmegaNeg;
  r1.delta = 0.05;
  r1.scale = PrecisionScale::Direct;
  SampleSizeRequest r2 = r1;
  r2.acc = s;
  r2.delta = 0.05 / (w * w);
  EXPECT_NEAR(sample_size_wald(r1).n_exact, sample_size_wald(r2).n_exact, 1e-9 * sample_size_wald(r1).n_exact);
}

TEST(SampleSizeWald, MoreDependenceMeansFewerSubjects) {
  for (double pi : {0.1, 0.25, 0.5}) {
    for (Target t : {Target::OmegaPos, Target::OmegaNeg}) {
      std::uint64_t prev = std::numeric_limits<std::uint64_t>::max();
      for (double k : {0.0, 0.25, 0.5, 0.75}) {
        const auto p = AccuracyParams::with_dependence_fraction(0.95, 0.90, 0.90, 0.80, pi, k);
        const std::uint64_t n = sample_size_wald(req(p, t, 0.1)).n;
        EXPECT_LT(n, prev) << pi << ' ' << k;
        prev = n;
      }
    }
  }
}

TEST(SampleSizeWald, PrevalenceMovesSizesInOppositeDirections) {
  std::uint64_t pos_prev = 0, neg_prev = std::numeric_limits<std::uint64_t>::max();
  for (double pi : {0.1, 0.25, 0.5}) {
    const auto p = fixtures::table2_header(pi);
    const std::uint64_t np = sample_size_wald(req(p, Target::OmegaPos, 0.1)).n;
    const std::uint64_t nn = sample_size_wald(req(p, Target::OmegaNeg, 0.1)).n;
    EXPECT_GT(np, pos_prev);
    EXPECT_LT(nn, neg_prev);
    pos_prev = np;
    neg_prev = nn;
  }
}

TEST(SampleSizeWald, BracketPositiveAndGuarded) {
  EXPECT_NEAR(sample_size_bracket(fixtures::table2_header().values(), Target::OmegaPos), 100.0 / 9.0, 1e-12);
  Accuracy bad = fixtures::table2_header().values();
  bad.eps1 = 5.0;
  try {
    sample_size_bracket(bad, Target::OmegaPos);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveBracket);
  }
  Accuracy cc = bad;
  cc.prevalence.reset();
  EXPECT_THROW(sample_size_bracket(cc, Target::OmegaPos), Error);
}

TEST(SampleSizeLog, HandEvaluatedExample) {
  SampleSizeRequest r = req(fixtures::table2_header(), Target::OmegaPos, 1.25);
  r.method = Method::Logarithmic;
  const SampleSizeResult s = compute_sample_size(r);
  const double z = two_sided_z(0.95);
  EXPECT_NEAR(s.n_exact, std::pow(z / std::log(1.25), 2) * 100.0 / 9.0, 1e-9);
  EXPECT_EQ(s.n, 858u);
  EXPECT_DOUBLE_EQ(s.bracket, sample_size_wald(req(fixtures::table2_header(), Target::OmegaPos, 0.1)).bracket);
}

TEST(SampleSizeLog, LimitsAndValidation) {
  SampleSizeRequest r = req(fixtures::table2_header(), Target::OmegaPos, 1e12);
  r.method = Method::Logarithmic;
  EXPECT_EQ(compute_sample_size(r).n, 1u);
  r.delta = 1.0;
  try {
    compute_sample_size(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidPrecision);
  }
  r.method = Method::Fieller;
  r.delta = 1.1;
  EXPECT_THROW(compute_sample_size(r), Error);
}

TEST(Iterative, CoronaryPilotNeedsMoreSubjects) {
  const IterationResult it = iterative_procedure(fixtures::kCoronary, Target::OmegaPos, 0.10, 0.95);
  ASSERT_EQ(it.history.size(), 1u);
  EXPECT_NEAR(it.history[0].precision, 0.12, 0.005);
  EXPECT_FALSE(it.achieved);
  EXPECT_TRUE(it.awaiting_data);
  EXPECT_NEAR(static_cast<double>(it.n_final), 2146.0, 0.01 * 2146);
}

TEST(Iterative, ColorectalPilotPrecision) {
  const IterationResult it =
      iterative_procedure(fixtures::kColorectal, Target::OmegaNeg, 0.50, 0.95, PrecisionScale::Direct);
  EXPECT_NEAR(it.history[0].precision, 0.931, 0.0015);
  const IterationResult r = iterative_procedure(fixtures::kColorectal, Target::OmegaNeg, 0.10, 0.95);
  EXPECT_NEAR(r.history[0].precision, 0.184, 0.0015);
}

TEST(Iterative, EarlyExitWhenPrecisionAlreadyMet) {
  const IterationResult it = iterative_procedure(fixtures::kCoronary, Target::OmegaNeg, 0.5, 0.95);
  EXPECT_TRUE(it.achieved);
  EXPECT_EQ(it.rounds, 0u);
  EXPECT_EQ(it.n_final, fixtures::kCoronary.total());
}

TEST(Iterative, SimulationModeConverges) {
  const auto p = fixtures::table2_header(0.25, 0.036, 0.064);
  Engine rng = make_engine(8);
  PairedCounts pilot;
  do {
    pilot = sample_table(p, 200, rng);
  } while (!is_estimable(pilot));
  const IterationResult it =
      iterative_procedure(pilot, Target::OmegaPos, 0.10, 0.95, PrecisionScale::Auto, 10, augment_from(p, 99));
  EXPECT_TRUE(it.achieved) << it.notes;
  EXPECT_GE(it.rounds, 1u);
  EXPECT_EQ(it.history.size(), it.rounds + 1);
  EXPECT_LE(it.history.back().precision, 0.10);
}

TEST(Iterative, RoundLimitIsReported) {
  const auto p = fixtures::table2_header(0.25, 0.036, 0.064);
  const IterationResult it = iterative_procedure(fixtures::kCoronary, Target::OmegaNeg, 1e-4, 0.95,
                                                 PrecisionScale::Direct, 0, augment_from(p, 1));
  EXPECT_FALSE(it.achieved);
  EXPECT_FALSE(it.awaiting_data);
  EXPECT_FALSE(it.notes.empty());
}

TEST(Iterative, CaseControlPilotIsRejected) {
  PairedCounts t = fixtures::kCoronary;
  t.design = Design::CaseControl;
  try {
    iterative_procedure(t, Target::OmegaPos, 0.1, 0.95);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotApplicable);
  }
}

TEST(Robustness, RelativeBiasIsSmallAndPositive) {
  const auto p = fixtures::table2_header(0.25, 0.036, 0.064);
  const RobustnessResult r = robustness_study(p, Target::OmegaPos, 0.10, 2000, 17);
  EXPECT_EQ(r.n_true, 786u);
  EXPECT_GE(r.relative_bias, 0.0);
  EXPECT_LE(r.relative_bias, 0.05);
}

TEST(Robustness, Reproducible) {
  const auto p = fixtures::table2_header(0.5, 0.036, 0.064);
  const RobustnessResult a = robustness_study(p, Target::OmegaNeg, 0.10, 200, 3, 0.95, PrecisionScale::Auto, 1);
  const RobustnessResult b = robustness_study(p, Target::OmegaNeg, 0.10, 200, 3, 0.95, PrecisionScale::Auto, 4);
  EXPECT_EQ(a.n_bar, b.n_bar);
}

}  // namespace
