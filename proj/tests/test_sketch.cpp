#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "osilab/instances.hpp"
#include "osilab/sketch.hpp"

namespace osilab {
namespace {

constexpr RngSeed kSeed{2024};

std::vector<SketchFamily> all_families() {
  return {
      SketchFamily::gaussian(3, 4),         SketchFamily::identity_mix(0.3),
      SketchFamily::augmented_spike(0.1, 2), SketchFamily::trace_spike(2, 0.5, 0.5),
      SketchFamily::expo_rank_one(0.5),     SketchFamily::sign_pair(),
      SketchFamily::sparse_signed(4, 2),    SketchFamily::lp_sampler(4, 2, 1.5),
  };
}

TEST(Draw, SameSeedSameMatrix) {
  for (const auto& f : all_families()) {
    const Matrix a = draw(f, RngSeed{99}).omega;
    const Matrix b = draw(f, RngSeed{99}).omega;
    EXPECT_EQ(a, b) << to_string(f.name());
    EXPECT_EQ(a.rows(), f.n());
    EXPECT_EQ(a.cols(), f.k());
  }
}

TEST(Draw, DifferentSeedsDiffer) {
  const auto f = SketchFamily::gaussian(3, 3);
  EXPECT_NE(draw(f, RngSeed{1}).omega, draw(f, RngSeed{2}).omega);
}

TEST(Families, ParameterValidation) {
  EXPECT_THROW(SketchFamily::identity_mix(1.0), Error);
  EXPECT_THROW(SketchFamily::identity_mix(-0.1), Error);
  EXPECT_THROW(SketchFamily::augmented_spike(0.0, 2), Error);
  EXPECT_THROW(SketchFamily::augmented_spike(0.1, 0.5), Error);
  EXPECT_THROW(SketchFamily::trace_spike(4, 0.0, 0.25), Error);
  EXPECT_THROW(SketchFamily::trace_spike(4, 0.5, 1.0), Error);
  EXPECT_THROW(SketchFamily::expo_rank_one(1.5), Error);
  EXPECT_THROW(SketchFamily::gaussian(0, 2), Error);
  EXPECT_THROW(SketchFamily::lp_sampler(4, 2, 0.5), Error);
}

TEST(Gaussian, FrobeniusMeanIsN) {
  const auto f = SketchFamily::gaussian(2, 4);
  double acc = 0.0;
  constexpr int N = 20000;
  for (int t = 0; t < N; ++t) acc += draw(f, derive_seed(kSeed, t)).omega.squaredNorm();
  EXPECT_NEAR(acc / N, 2.0, 0.05 * 2.0);
}

TEST(Isotropy, EveryFamilyWithinMonteCarloSlack) {
  constexpr std::int64_t N = 20000;
  const double slack = 5.0 / std::sqrt(static_cast<double>(N));
  for (const auto& f : all_families()) {
    const double dev = check_isotropy(f, N, kSeed);
    const double tol = f.p_isotropic() ? 0.02 : slack;
    EXPECT_LE(dev, tol) << to_string(f.name());
  }
  EXPECT_THROW(check_isotropy(SketchFamily::sign_pair(), 999, kSeed), Error);
}

TEST(Isotropy, ExactBranchEnumeration) {
  const std::vector<SketchFamily> finite{SketchFamily::identity_mix(0.3), SketchFamily::augmented_spike(0.1, 2),
                                         SketchFamily::trace_spike(4, 0.5, 0.25), SketchFamily::sign_pair(),
                                         SketchFamily::identity_mix(0.0)};
  for (const auto& f : finite) {
    const auto branches = finite_branches(f);
    ASSERT_TRUE(branches.has_value());
    double total = 0.0;
    for (const auto& b : *branches) total += b.probability;
    EXPECT_NEAR(total, 1.0, 1e-15);
    const Matrix mean = mixture_gram_mean(*branches);
    EXPECT_LE((mean - Matrix::Identity(f.n(), f.n())).cwiseAbs().maxCoeff(), 1e-14) << to_string(f.name());
  }
  EXPECT_FALSE(finite_branches(SketchFamily::gaussian(2, 2)).has_value());
}

TEST(IdentityMix, BranchFrequencies) {
  const auto f = SketchFamily::identity_mix(0.3);
  std::map<int, int> counts;
  constexpr int N = 100000;
  for (int t = 0; t < N; ++t) ++counts[*draw(f, derive_seed(kSeed, t)).branch];
  EXPECT_NEAR(counts[1] / double(N), 0.15, 0.01);
  EXPECT_NEAR(counts[2] / double(N), 0.15, 0.01);

  const auto never = SketchFamily::identity_mix(0.0);
  for (int t = 0; t < 1000; ++t) EXPECT_EQ(draw(never, derive_seed(kSeed, t)).omega, Matrix::Identity(2, 2));
}

TEST(AugmentedSpike, InjectiveOnEveryDraw) {
  const auto f = SketchFamily::augmented_spike(0.1, 2);
  Engine eng = make_engine(RngSeed{3});
  for (int t = 0; t < 200; ++t) {
    const Matrix omega = draw(f, derive_seed(kSeed, t)).omega;
    for (int i = 0; i < 5; ++i) {
      const Vector x = gaussian_matrix(2, 1, eng).col(0);
      EXPECT_GE((omega.transpose() * x).squaredNorm(), 0.9 * x.squaredNorm() - 1e-12);
    }
  }
}

TEST(AugmentedSpike, SpikeProbability) {
  const auto f = SketchFamily::augmented_spike(0.1, 2);
  int spikes = 0;
  constexpr int N = 1000000;
  for (int t = 0; t < N; ++t) spikes += *draw(f, derive_seed(kSeed, t)).branch == 0;
  EXPECT_NEAR(spikes / double(N), 0.025, 0.0015);
}

TEST(TraceSpike, TwoPointLambdaMax) {
  const auto f = SketchFamily::trace_spike(4, 0.5, 0.25);
  const Matrix I = Matrix::Identity(4, 4);
  constexpr int N = 20000;
  int heavy = 0;
  for (int t = 0; t < N; ++t) {
    const Matrix omega = draw(f, derive_seed(kSeed, t)).omega;
    EXPECT_LE((omega - omega.transpose()).cwiseAbs().maxCoeff(), 0.0);
    const Vector lambda = gram_eigenvalues(I, omega);
    const double top = lambda.maxCoeff();
    const bool is_heavy = std::abs(top - 8.5) < 1e-9;
    EXPECT_TRUE(is_heavy || std::abs(top - 0.5) < 1e-9) << top;
    EXPECT_NEAR(lambda.minCoeff(), 0.5, 1e-12);
    heavy += is_heavy;
  }
  EXPECT_NEAR(heavy / double(N), 0.25, 3.0 * std::sqrt(0.25 * 0.75 / N));
}

TEST(ExpoRankOne, MinEigenvalueIsAlpha) {
  const auto f = SketchFamily::expo_rank_one(0.5);
  for (int t = 0; t < 2000; ++t) {
    const Matrix omega = draw(f, derive_seed(kSeed, t)).omega;
    EXPECT_NEAR(gram_min_eig(Matrix::Identity(2, 2), omega), 0.5, 1e-12);
  }
}

TEST(SignPair, FrequencyAndMaxProperty) {
  const auto f = SketchFamily::sign_pair();
  constexpr int N = 100000;
  int plus = 0;
  for (int t = 0; t < N; ++t) plus += *draw(f, derive_seed(kSeed, t)).branch == 0;
  EXPECT_NEAR(plus / double(N), 0.5, 0.005);

  const auto branches = *finite_branches(f);
  Engine eng = make_engine(RngSeed{4});
  for (int i = 0; i < 1000; ++i) {
    const Vector v = gaussian_matrix(2, 1, eng).col(0).normalized();
    const double a = (branches[0].omega.transpose() * v).squaredNorm();
    const double b = (branches[1].omega.transpose() * v).squaredNorm();
    EXPECT_GE(std::max(a, b), 1.0 - 1e-12);
  }
}

TEST(SparseSigned, EntryDistribution) {
  const auto f = SketchFamily::sparse_signed(30, 1);
  constexpr int N = 20000;
  int zeros = 0;
  int first_zero = 0;
  std::set<double> values;
  for (int t = 0; t < N; ++t) {
    const Matrix omega = draw(f, derive_seed(kSeed, t)).omega;
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
      zeros += omega.data()[i] == 0.0;
      values.insert(omega.data()[i]);
    }
    first_zero += omega(0, 0) == 0.0;
  }
  EXPECT_EQ(values, (std::set<double>{-std::sqrt(2.0), 0.0, std::sqrt(2.0)}));
  EXPECT_NEAR(zeros / (30.0 * N), 0.5, 0.005);
  EXPECT_NEAR(first_zero / double(N), 0.5, 0.015);
}

TEST(LpSampler, EnumeratedDistribution) {
  // p = 2, n = 4, k = 2, z = e1: ||Omega^T z||^2 in {0, 2, 4} w.p. {9, 6, 1}/16
  const auto f = SketchFamily::lp_sampler(4, 2, 2.0);
  Vector z = Vector::Zero(4);
  z(0) = 1.0;
  std::map<long, int> counts;
  constexpr int N = 160000;
  for (int t = 0; t < N; ++t) {
    const double v = (draw(f, derive_seed(kSeed, t)).omega.transpose() * z).squaredNorm();
    counts[std::lround(v)]++;
    EXPECT_TRUE(v == 0.0 || std::abs(v - 2.0) < 1e-12 || std::abs(v - 4.0) < 1e-12);
  }
  const double se = 3.0 * std::sqrt(0.25 / N);
  EXPECT_NEAR(counts[0] / double(N), 9.0 / 16, se);
  EXPECT_NEAR(counts[2] / double(N), 6.0 / 16, se);
  EXPECT_NEAR(counts[4] / double(N), 1.0 / 16, se);
}

TEST(Injectivity, IdentityMixExamples) {
  const auto f = SketchFamily::identity_mix(0.3);
  Matrix e1 = Matrix::Zero(2, 1);
  e1(0, 0) = 1.0;
  // (e1 - e2)/sqrt2 is annihilated by B+ only, so it fails with rate rho/2
  Matrix diff(2, 1);
  diff << std::sqrt(0.5), -std::sqrt(0.5);
  EXPECT_EQ(check_injectivity(f, e1, 20000, 1.0, kSeed), 0.0);
  EXPECT_NEAR(check_injectivity(f, diff, 20000, 1.0, kSeed), 0.15, 0.012);
  EXPECT_THROW(check_injectivity(f, 2.0 * e1, 10, 1.0, kSeed), Error);
}

TEST(Injectivity, DeclaredZeroFailureFamilies) {
  Engine eng = make_engine(RngSeed{5});
  const std::vector<SketchFamily> families{SketchFamily::augmented_spike(0.1, 2),
                                           SketchFamily::trace_spike(3, 0.5, 0.3),
                                           SketchFamily::expo_rank_one(0.5)};
  for (const auto& f : families) {
    const auto& decl = *f.declared();
    ASSERT_EQ(decl.rho, 0.0);
    for (int sub = 0; sub < 20; ++sub) {
      const Matrix U = random_orthonormal(f.n(), decl.s, eng);
      EXPECT_EQ(check_injectivity(f, U, 2000, decl.alpha, derive_seed(kSeed, sub)), 0.0) << to_string(f.name());
    }
  }
}

TEST(LpInjectivity, OneDimensionalIsExact) {
  Matrix basis(3, 1);
  basis << 1.0, -2.0, 0.5;
  Matrix omega = Matrix::Zero(3, 2);
  omega(1, 0) = 2.0;
  omega(2, 1) = 2.0;
  // ||Omega^T v||_1 = 2*2 + 2*0.5 = 5, ||v||_1 = 3.5
  EXPECT_NEAR(lp_injectivity_ratio(basis, omega, 1.0), 5.0 / 3.5, 1e-15);
}

TEST(Config, RoundTrip) {
  for (const auto& f : all_families()) {
    const std::string text = to_config(f, RngSeed{77});
    const FamilyConfig back = parse_config("# comment\n\n" + text);
    EXPECT_EQ(back.family.name(), f.name());
    EXPECT_EQ(back.family.n(), f.n());
    EXPECT_EQ(back.family.k(), f.k());
    EXPECT_EQ(back.family.params(), f.params());
    EXPECT_EQ(back.seed, RngSeed{77});
    EXPECT_EQ(draw(back.family, back.seed).omega, draw(f, RngSeed{77}).omega);
  }
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config("name=sign_pair\nn=2\n"), Error);
  EXPECT_THROW(parse_config("name=bogus\nn=2\nk=1\n"), Error);
  EXPECT_THROW(parse_config("name=identity_mix\nn=2\nk=2\nrho=abc\n"), Error);
  EXPECT_THROW(parse_config("name=identity_mix\nn=2\nk=2\nrho=0.3\nextra=1\n"), Error);
  EXPECT_THROW(parse_config("name=identity_mix\nn=3\nk=2\nrho=0.3\n"), Error);
}

}  // namespace
}  // namespace osilab
