#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "osilab/instances.hpp"
#include "osilab/montecarlo.hpp"
#include "osilab/sketch.hpp"

namespace osilab {
namespace {

TrialRecord gaussian_ratio_trial(const LSInstance& inst, const SketchFamily& f, RngSeed s) {
  TrialRecord rec;
  rec.ratio = sketch_and_solve_ls(inst, draw(f, s).omega).ratio;
  return rec;
}

TEST(Seeds, DerivationIsStableAndSpread) {
  EXPECT_EQ(derive_seed(RngSeed{1}, 0), derive_seed(RngSeed{1}, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 20; ++m)
    for (std::uint64_t i = 0; i < 500; ++i) seen.insert(derive_seed(RngSeed{m}, i).value);
  EXPECT_EQ(seen.size(), 20u * 500u);
}

TEST(RunTrials, IndependentOfThreadCount) {
  Engine eng = make_engine(RngSeed{41});
  const LSInstance inst(gaussian_matrix(40, 4, eng), gaussian_matrix(40, 1, eng).col(0));
  const auto fam = SketchFamily::gaussian(40, 12);
  const TrialFn trial = [&](RngSeed s) { return gaussian_ratio_trial(inst, fam, s); };
  const auto one = run_trials(trial, 777, RngSeed{5}, 1);
  for (unsigned threads : {2u, 3u, 8u}) {
    const auto many = run_trials(trial, 777, RngSeed{5}, threads);
    ASSERT_EQ(many.size(), one.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
      EXPECT_EQ(many[i].index, static_cast<std::int64_t>(i));
      EXPECT_EQ(many[i].seed, one[i].seed);
      EXPECT_EQ(many[i].ratio, one[i].ratio);
    }
  }
}

TEST(RunTrials, PropagatesExceptions) {
  const TrialFn bad = [](RngSeed s) -> TrialRecord {
    if (s.value % 7 == 0) throw std::runtime_error("boom");
    return {};
  };
  EXPECT_THROW(run_trials(bad, 2000, RngSeed{1}, 4), std::runtime_error);
  EXPECT_THROW(run_trials(bad, 0, RngSeed{1}), Error);
}

TEST(Verdict, ThreeSigmaRule) {
  // at_least 0.9 with 880/1000: violation 0.12 vs 0.1 + 3*sqrt(.88*.12/1000) = 0.1308
  EXPECT_EQ(make_report(880, 1000, 0.9, Direction::at_least).verdict, Verdict::consistent);
  EXPECT_EQ(make_report(860, 1000, 0.9, Direction::at_least).verdict, Verdict::violated);
  EXPECT_EQ(make_report(130, 1000, 0.1, Direction::at_most).verdict, Verdict::consistent);
  EXPECT_EQ(make_report(150, 1000, 0.1, Direction::at_most).verdict, Verdict::violated);
  // equals 0.3: 3 se at p = 0.3, N = 1e4 is 0.01375
  EXPECT_EQ(make_report(3130, 10000, 0.3, Direction::equals).verdict, Verdict::consistent);
  EXPECT_EQ(make_report(3150, 10000, 0.3, Direction::equals).verdict, Verdict::violated);
  EXPECT_EQ(make_report(2850, 10000, 0.3, Direction::equals).verdict, Verdict::violated);
  EXPECT_EQ(make_report(1000, 1000, 1.0, Direction::always).verdict, Verdict::consistent);
  EXPECT_EQ(make_report(999, 1000, 1.0, Direction::always).verdict, Verdict::violated);

  const auto r = make_report(880, 1000, 0.9, Direction::at_least);
  EXPECT_NEAR(r.empirical_violation_rate, 0.12, 1e-15);
  EXPECT_NEAR(r.allowed_failure, 0.1, 1e-15);
  EXPECT_NEAR(r.mc_std_error, std::sqrt(0.88 * 0.12 / 1000), 1e-15);
}

TEST(Verdict, TooFewTrials) {
  try {
    make_report(5, 999, 0.5, Direction::at_least);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewTrials);
  }
}

TEST(Verdict, IdentitySketchTriviallyConsistent) {
  const auto inst = spiked_diagonal_instance(6, 0.3);
  const auto records = run_trials(
      [&](RngSeed) {
        TrialRecord rec;
        rec.ratio = rangefinder_rsvd(inst, Matrix::Identity(6, 6)).ratio;
        return rec;
      },
      1000, RngSeed{2});
  for (const auto& r : records) EXPECT_NEAR(r.ratio, 0.0, 1e-12);  // full sketch: no error at all
  EXPECT_EQ(verify_rsvd_bound(records, 1.0, 0.0, 5, 0.1).verdict, Verdict::consistent);
}

TEST(Deflation, TopSingularVectorsAreTight) {
  Engine eng = make_engine(RngSeed{42});
  const LowRankInstance inst(gaussian_matrix(12, 8, eng), 3);
  const auto c = deflation_identity_check(inst, inst.factors().V.leftCols(3));
  const double tail = inst.optimal_error() * inst.optimal_error();
  EXPECT_NEAR(c.lhs, tail, 1e-10);
  EXPECT_NEAR(c.rhs, tail, 1e-10);
}

TEST(Deflation, GaussianInstances) {
  Engine eng = make_engine(RngSeed{43});
  std::uniform_int_distribution<int> dim(4, 12);
  for (int t = 0; t < 1000; ++t) {
    const int n = dim(eng), d = dim(eng);
    const int r = 1 + t % 3;
    const LowRankInstance inst(gaussian_matrix(n, d, eng), r);
    const int k = r + t % 4;
    const auto c = deflation_identity_check(inst, gaussian_matrix(d, k, eng));
    EXPECT_LE(c.discrepancy, 1e-8 * c.rhs);
  }
}

TEST(Deflation, SignPair) {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 0.2;
  const LowRankInstance inst(A, 1);
  const auto branches = *finite_branches(SketchFamily::sign_pair());
  for (const auto& b : branches) {
    const auto c = deflation_identity_check(inst, b.omega);
    EXPECT_NEAR(c.lhs, 2 * 0.04 / 1.04, 1e-14);
    EXPECT_NEAR(c.rhs, 2 * 0.04, 1e-14);
    EXPECT_LE(c.discrepancy, 1e-8 * c.rhs);
  }
}

TEST(Deflation, RankDeficientLeadingBlock) {
  const auto inst = spiked_diagonal_instance(4, 0.5);
  Matrix omega = Matrix::Zero(4, 1);
  omega(2, 0) = 1.0;
  try {
    deflation_identity_check(inst, omega);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
  }
}

TEST(Quantile, Interpolates) {
  const std::vector<double> v{4, 1, 3, 2, 5};
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.125), 1.5);
  EXPECT_THROW(quantile({}, 0.5), Error);
}

TEST(Bootstrap, SpreadShrinksWithSampleSize) {
  Engine eng = make_engine(RngSeed{44});
  std::normal_distribution<double> normal;
  std::vector<double> small(100), large(10000);
  for (auto& x : small) x = normal(eng);
  for (auto& x : large) x = normal(eng);
  const double a = bootstrap_quantile_spread(small, 0.5, RngSeed{1});
  const double b = bootstrap_quantile_spread(large, 0.5, RngSeed{1});
  EXPECT_GT(a, 0.0);
  EXPECT_LT(b, a / 4.0);
  EXPECT_EQ(a, bootstrap_quantile_spread(small, 0.5, RngSeed{1}));
}

TEST(Histogram, CountsAndOverflow) {
  const auto h = histogram({0.0, 0.1, 0.5, 0.99, 1.0, 1.5, -0.2}, 0.0, 1.0, 4);
  EXPECT_EQ(h.counts, (std::vector<std::int64_t>{2, 0, 1, 2}));
  EXPECT_EQ(h.underflow, 1);
  EXPECT_EQ(h.overflow, 1);
  EXPECT_EQ(h.total, 7);
  EXPECT_THROW(histogram({1.0}, 1.0, 1.0, 3), Error);
}

}  // namespace
}  // namespace osilab
