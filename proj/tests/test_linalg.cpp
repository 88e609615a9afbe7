#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "osilab/instances.hpp"
#include "osilab/linalg.hpp"

namespace osilab {
namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) M(i, j++) = v;
    ++i;
  }
  return M;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

TEST(QrReduced, Identity) {
  const auto f = qr_reduced(Matrix::Identity(2, 2));
  EXPECT_TRUE(f.Q.isApprox(Matrix::Identity(2, 2)));
  EXPECT_TRUE(f.R.isApprox(Matrix::Identity(2, 2)));
}

TEST(QrReduced, UnitColumnHasPositiveDiagonal) {
  const auto f = qr_reduced(mat({{1}, {0}}));
  EXPECT_DOUBLE_EQ(f.R(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(f.Q(0, 0), 1.0);
  const auto g = qr_reduced(mat({{-1}, {0}}));
  EXPECT_DOUBLE_EQ(g.R(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(g.Q(0, 0), -1.0);
}

TEST(QrReduced, ThreeFourFive) {
  const auto f = qr_reduced(mat({{3}, {4}}));
  EXPECT_NEAR(f.R(0, 0), 5.0, 1e-14);
  EXPECT_NEAR(f.Q(0, 0), 0.6, 1e-14);
  EXPECT_NEAR(f.Q(1, 0), 0.8, 1e-14);
}

TEST(QrReduced, RankDeficientThrows) {
  try {
    qr_reduced(mat({{1, 2}, {2, 4}, {3, 6}}));
    FAIL() << "expected RankDeficient";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
  }
}

TEST(QrReduced, RandomReconstruction) {
  Engine eng = make_engine(RngSeed{11});
  std::uniform_int_distribution<int> dim(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = dim(eng);
    const int n = d + dim(eng) + 0;
    const Matrix A = gaussian_matrix(std::min(n, 12), d, eng);
    const auto f = qr_reduced(A);
    EXPECT_LE(orthonormality_defect(f.Q), 1e-10);
    EXPECT_LE((f.Q * f.R - A).norm(), 1e-10 * A.norm());
    EXPECT_LE(f.R.triangularView<Eigen::StrictlyLower>().toDenseMatrix().cwiseAbs().maxCoeff(), 0.0);
    for (int j = 0; j < d; ++j) EXPECT_GE(f.R(j, j), 0.0);

    const Vector b = gaussian_matrix(A.rows(), 1, eng).col(0);
    const auto sol = lstsq_exact(A, b);
    EXPECT_LE((A.transpose() * (A * sol.x - b)).norm(), 1e-8 * std::max(1.0, b.norm()));
  }
}

TEST(Svd, Diagonal) {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 0.2;
  const auto f = svd(A);
  EXPECT_NEAR(f.singular_values(0), 1.0, 1e-15);
  EXPECT_NEAR(f.singular_values(1), 0.2, 1e-15);
}

TEST(Svd, AllOnes) {
  const auto f = svd(mat({{1, 1}, {1, 1}}));
  EXPECT_NEAR(f.singular_values(0), 2.0, 1e-14);
  EXPECT_NEAR(f.singular_values(1), 0.0, 1e-14);
}

TEST(Svd, SpikedDiagonal) {
  const auto f = svd(spiked_diagonal_instance(30, 0.2).A());
  EXPECT_NEAR(f.singular_values(0), 1.0, 1e-14);
  for (int i = 1; i < 30; ++i) EXPECT_NEAR(f.singular_values(i), 0.2, 1e-14);
}

TEST(Svd, RandomCorpus) {
  Engine eng = make_engine(RngSeed{12});
  std::uniform_int_distribution<int> dim(1, 32);
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix A = gaussian_matrix(dim(eng), dim(eng), eng);
    const auto f = svd(A);
    const double scale = std::max(1.0, A.norm());
    EXPECT_LE((f.U * f.singular_values.asDiagonal() * f.V.transpose() - A).norm(), 1e-10 * scale);
    EXPECT_LE(orthonormality_defect(f.U), 1e-10);
    EXPECT_LE(orthonormality_defect(f.V), 1e-10);
    for (Eigen::Index i = 1; i < f.size(); ++i) EXPECT_LE(f.singular_values(i), f.singular_values(i - 1));
    const Matrix P = pinv(A);
    EXPECT_LE((A * P * A - A).norm(), 1e-8 * scale);
  }
}

TEST(Svd, LargeUsesDivideAndConquerPath) {
  Engine eng = make_engine(RngSeed{13});
  const Matrix A = gaussian_matrix(120, 60, eng);
  const auto f = svd(A);
  EXPECT_LE((f.U * f.singular_values.asDiagonal() * f.V.transpose() - A).norm(), 1e-10 * A.norm());
}

TEST(Pinv, Examples) {
  EXPECT_TRUE(pinv(Matrix::Identity(3, 3)).isApprox(Matrix::Identity(3, 3)));
  const Matrix p = pinv(mat({{1}, {1}}));
  ASSERT_EQ(p.rows(), 1);
  ASSERT_EQ(p.cols(), 2);
  EXPECT_NEAR(p(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(p(0, 1), 0.5, 1e-15);
  const Matrix z = pinv(Matrix::Zero(2, 3));
  EXPECT_EQ(z.rows(), 3);
  EXPECT_EQ(z.cols(), 2);
  EXPECT_EQ(z.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Pinv, PenroseIdentities) {
  Engine eng = make_engine(RngSeed{14});
  // rank-deficient 7 x 5 built from a rank-3 product
  const Matrix A = gaussian_matrix(7, 3, eng) * gaussian_matrix(3, 5, eng);
  const Matrix P = pinv(A);
  const double tol = 1e-8 * P.norm();
  EXPECT_LE((A * P * A - A).norm(), tol);
  EXPECT_LE((P * A * P - P).norm(), tol);
  EXPECT_LE(((A * P).transpose() - A * P).norm(), tol);
  EXPECT_LE(((P * A).transpose() - P * A).norm(), tol);
}

TEST(Lstsq, Examples) {
  auto s = lstsq_exact(mat({{1}, {0}}), vec({0, 1}));
  EXPECT_EQ(s.x(0), 0.0);
  EXPECT_DOUBLE_EQ(s.residual_norm, 1.0);
  s = lstsq_exact(mat({{1}, {0}}), vec({2, 3}));
  EXPECT_DOUBLE_EQ(s.x(0), 2.0);
  EXPECT_DOUBLE_EQ(s.residual_norm, 3.0);
  s = lstsq_exact(mat({{1, 0}, {0, 1}, {1, 1}}), vec({1, 2, 3}));
  EXPECT_NEAR(s.residual_norm, 0.0, 1e-14);
}

TEST(BestRankR, Examples) {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 0.2;
  EXPECT_NEAR(best_rank_r(A, 1).tail_frob, 0.2, 1e-15);

  const auto spiked = spiked_diagonal_instance(30, 0.2);
  const double tail = best_rank_r(spiked.A(), 1).tail_frob;
  EXPECT_NEAR(tail * tail, 29 * 0.04, 1e-13);

  EXPECT_THROW(best_rank_r(A, 2), Error);
  EXPECT_THROW(best_rank_r(A, 0), Error);
}

TEST(LpNorm, Examples) {
  EXPECT_DOUBLE_EQ(lp_norm(vec({3, 4}), 2), 5.0);
  EXPECT_DOUBLE_EQ(lp_norm(vec({1, 1, 1}), 1), 3.0);
  EXPECT_NEAR(lp_norm(vec({1, 1}), 3), std::cbrt(2.0), 1e-15);
  try {
    lp_norm(vec({1}), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadExponent);
  }
}

TEST(GramMinEig, Examples) {
  Engine eng = make_engine(RngSeed{15});
  const Matrix U = random_orthonormal(5, 2, eng);
  EXPECT_NEAR(gram_min_eig(U, Matrix::Identity(5, 5)), 1.0, 1e-12);

  const Matrix Bplus = mat({{1, 0}, {1, 0}});
  // ||Bplus^T x||^2 = (x1 + x2)^2
  const double h = std::sqrt(0.5);
  EXPECT_NEAR(gram_min_eig(mat({{1}, {0}}), Bplus), 1.0, 1e-15);
  EXPECT_NEAR(gram_min_eig(mat({{h}, {h}}), Bplus), 2.0, 1e-15);
  EXPECT_NEAR(gram_min_eig(mat({{h}, {-h}}), Bplus), 0.0, 1e-15);

  try {
    gram_min_eig(mat({{2}, {0}}), Bplus);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotOrthonormal);
  }
}

TEST(GramMinEig, LowerBoundsEveryProbe) {
  Engine eng = make_engine(RngSeed{16});
  const Matrix U = random_orthonormal(8, 3, eng);
  const Matrix omega = gaussian_matrix(8, 4, eng);
  const double lo = gram_min_eig(U, omega);
  for (int i = 0; i < 1000; ++i) {
    Vector c = gaussian_matrix(3, 1, eng).col(0);
    const Vector u = U * c.normalized();
    EXPECT_LE(lo, (omega.transpose() * u).squaredNorm() + 1e-12);
  }
}

TEST(SymSqrt, SquaresBack) {
  Engine eng = make_engine(RngSeed{17});
  const Matrix G = gaussian_matrix(4, 4, eng);
  const Matrix S = G * G.transpose();
  const Matrix R = sym_sqrt(S);
  EXPECT_LE((R * R - S).norm(), 1e-10 * S.norm());
  EXPECT_THROW(sym_sqrt(-Matrix::Identity(2, 2)), Error);
}

}  // namespace
}  // namespace osilab
