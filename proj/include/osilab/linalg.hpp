#pragma once

// Dense kernels shared by every other module. Storage and factorizations are
// Eigen; this layer fixes sign conventions, rank tests and error reporting.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "osilab/error.hpp"

namespace osilab {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct QrFactors {
  Matrix Q;  // n x d, orthonormal columns
  Matrix R;  // d x d, upper triangular, nonnegative diagonal
};

/// U * diag(singular_values) * V^T, thin, q = min(rows, cols).
struct SvdFactors {
  Matrix U;
  Vector singular_values;
  Matrix V;

  Eigen::Index size() const { return singular_values.size(); }
};

struct LstsqSolution {
  Vector x;
  double residual_norm = 0.0;
};

struct RankApproximation {
  Matrix approx;
  double tail_frob = 0.0;
};

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& A) { return A.allFinite(); }

/// Largest deviation of U^T U from the identity.
inline double orthonormality_defect(const Eigen::Ref<const Eigen::MatrixXd>& U) {
  const Eigen::MatrixXd G = U.transpose() * U;
  return (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

inline QrFactors qr_reduced(const Matrix& A) {
  detail::require(A.rows() >= 1 && A.cols() >= 1, ErrorCode::BadParams, "qr_reduced: empty matrix");
  detail::require(A.rows() >= A.cols(), ErrorCode::BadParams, "qr_reduced: needs rows >= cols");
  detail::require(A.allFinite(), ErrorCode::BadParams, "qr_reduced: non-finite entry");

  const Eigen::Index n = A.rows();
  const Eigen::Index d = A.cols();

  // Rank test on the column-pivoted factorization; factors from the unpivoted one.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivoted(A);
  const auto pivots = pivoted.matrixR().diagonal().head(d).cwiseAbs();
  const double largest = pivots.maxCoeff();
  if (!(largest > 0.0) || pivots.minCoeff() <= 1e-12 * largest) {
    throw Error(ErrorCode::RankDeficient, "qr_reduced: matrix is not of full column rank");
  }

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  QrFactors out;
  out.Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, d);
  out.R = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (out.R(j, j) < 0.0) {
      out.R.row(j) *= -1.0;
      out.Q.col(j) *= -1.0;
    }
  }
  return out;
}

inline SvdFactors svd(const Matrix& A) {
  detail::require(A.rows() >= 1 && A.cols() >= 1, ErrorCode::BadParams, "svd: empty matrix");
  detail::require(A.allFinite(), ErrorCode::BadParams, "svd: non-finite entry");

  SvdFactors out;
  // One-sided Jacobi is the accurate choice at the sizes in scope; the
  // divide-and-conquer path only kicks in for the larger experiment matrices.
  if (std::min(A.rows(), A.cols()) <= 48) {
    Eigen::JacobiSVD<Eigen::MatrixXd> solver(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "svd: Jacobi sweep cap hit");
    out.U = solver.matrixU();
    out.singular_values = solver.singularValues();
    out.V = solver.matrixV();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> solver(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "svd: iteration cap hit");
    out.U = solver.matrixU();
    out.singular_values = solver.singularValues();
    out.V = solver.matrixV();
  }
  return out;
}

/// Rank cutoff used by pinv and rank queries: max(rows, cols) * eps * sigma_1.
inline double rank_tolerance(const SvdFactors& f, Eigen::Index rows, Eigen::Index cols) {
  if (f.size() == 0) return 0.0;
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() *
         f.singular_values(0);
}

inline Eigen::Index numerical_rank(const SvdFactors& f, Eigen::Index rows, Eigen::Index cols) {
  const double tol = rank_tolerance(f, rows, cols);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (f.singular_values(i) > tol) ++rank;
  }
  return rank;
}

inline Matrix pinv(const Matrix& A) {
  const SvdFactors f = svd(A);
  const Eigen::Index rank = numerical_rank(f, A.rows(), A.cols());
  Matrix out = Matrix::Zero(A.cols(), A.rows());
  if (rank == 0) return out;
  const Vector inv = f.singular_values.head(rank).cwiseInverse();
  out = f.V.leftCols(rank) * inv.asDiagonal() * f.U.leftCols(rank).transpose();
  return out;
}

inline LstsqSolution lstsq_exact(const Matrix& A, const Vector& b) {
  detail::require(b.size() == A.rows(), ErrorCode::BadParams, "lstsq_exact: size mismatch");
  const QrFactors f = qr_reduced(A);
  LstsqSolution out;
  const Vector z = f.Q.transpose() * b;
  out.x = f.R.triangularView<Eigen::Upper>().solve(z);
  out.residual_norm = (A * out.x - b).norm();
  return out;
}

/// Truncation of precomputed factors; `rows`/`cols` are the shape of A.
inline RankApproximation best_rank_r(const SvdFactors& f, Eigen::Index rows, Eigen::Index cols,
                                     Eigen::Index r) {
  const Eigen::Index rank = numerical_rank(f, rows, cols);
  if (r < 1 || r >= rank) throw Error(ErrorCode::BadRank, "best_rank_r: need 1 <= r < rank(A)");
  RankApproximation out;
  out.approx = f.U.leftCols(r) * f.singular_values.head(r).asDiagonal() * f.V.leftCols(r).transpose();
  out.tail_frob = f.singular_values.tail(f.size() - r).norm();
  return out;
}

inline RankApproximation best_rank_r(const Matrix& A, Eigen::Index r) {
  return best_rank_r(svd(A), A.rows(), A.cols(), r);
}

/// sum_i |v_i|^p, the quantity p-isotropy is stated in.
inline double lp_norm_pow(const Eigen::Ref<const Vector>& v, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorCode::BadExponent, "need finite p >= 1");
  if (p == 2.0) return v.squaredNorm();
  if (p == 1.0) return v.cwiseAbs().sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v(i)), p);
  return acc;
}

inline double lp_norm(const Eigen::Ref<const Vector>& v, double p) {
  const double s = lp_norm_pow(v, p);
  if (p == 1.0) return s;
  if (p == 2.0) return std::sqrt(s);
  return std::pow(s, 1.0 / p);
}

/// Eigenvalues (ascending) of U^T Omega Omega^T U.
inline Vector gram_eigenvalues(const Matrix& U, const Matrix& Omega) {
  detail::require(U.rows() == Omega.rows(), ErrorCode::BadParams, "gram: U and Omega row counts differ");
  if (orthonormality_defect(U) > 1e-8) {
    throw Error(ErrorCode::NotOrthonormal, "gram: U^T U deviates from identity by more than 1e-8");
  }
  const Eigen::MatrixXd W = U.transpose() * Omega;
  const Eigen::MatrixXd G = W * W.transpose();
  if (G.rows() == 1) return Vector::Constant(1, G(0, 0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
  return eig.eigenvalues();
}

/// min over unit x in range(U) of ||Omega^T x||^2.
inline double gram_min_eig(const Matrix& U, const Matrix& Omega) {
  return gram_eigenvalues(U, Omega).minCoeff();
}

/// Principal square root of a symmetric PSD matrix. Eigenvalues in
/// [-1e-12, 0) are clamped to zero; anything more negative is rejected.
inline Matrix sym_sqrt(const Matrix& S) {
  detail::require(S.rows() == S.cols(), ErrorCode::BadParams, "sym_sqrt: matrix not square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  Vector lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < -1e-12) throw Error(ErrorCode::BadParams, "sym_sqrt: matrix is not positive semidefinite");
    lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
  }
  const Eigen::MatrixXd& E = eig.eigenvectors();
  Matrix out = E * lambda.asDiagonal() * E.transpose();
  return out;
}

}  // namespace osilab
