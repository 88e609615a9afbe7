#pragma once

// Problem instances used by the experiment presets.

#include <cmath>
#include <cstdint>

#include "osilab/estimators.hpp"
#include "osilab/linalg.hpp"
#include "osilab/rng.hpp"

namespace osilab {

/// Haar-distributed n x m matrix with orthonormal columns (m <= n).
inline Matrix random_orthonormal(Eigen::Index n, Eigen::Index m, Engine& eng) {
  std::normal_distribution<double> normal;
  Matrix G(n, m);
  for (Eigen::Index i = 0; i < G.size(); ++i) G.data()[i] = normal(eng);
  return qr_reduced(G).Q;
}

inline Matrix gaussian_matrix(Eigen::Index n, Eigen::Index m, Engine& eng) {
  std::normal_distribution<double> normal;
  Matrix G(n, m);
  for (Eigen::Index i = 0; i < G.size(); ++i) G.data()[i] = normal(eng);
  return G;
}

/// A = (1, 0)^T, b = (0, 1)^T: x_star = 0 and the optimal residual is 1.
inline LSInstance toy_ls_instance() {
  Matrix A(2, 1);
  A << 1.0, 0.0;
  Vector b(2);
  b << 0.0, 1.0;
  return LSInstance(std::move(A), std::move(b));
}

/// diag(1, tau, ..., tau) of size n with target rank 1.
inline LowRankInstance spiked_diagonal_instance(int n, double tau) {
  Matrix A = Matrix::Identity(n, n) * tau;
  A(0, 0) = 1.0;
  return LowRankInstance(std::move(A), 1);
}

/// Least-squares test problem with a prescribed spectrum: A = U diag(sigma) V^T
/// with Haar U, V, x_star ~ N(0, I) and noise e orthogonal to range(A) with
/// ||e|| = noise_ratio * ||A x_star|| / sqrt(n).
inline LSInstance spectrum_ls_instance(int n, int d, double sigma_min, double noise_ratio, RngSeed seed) {
  Engine eng = make_engine(seed);
  const Matrix U = random_orthonormal(n, d, eng);
  const Matrix V = random_orthonormal(d, d, eng);
  Vector sigma(d);
  for (int i = 0; i < d; ++i) sigma(i) = d == 1 ? 1.0 : std::pow(sigma_min, static_cast<double>(i) / (d - 1));
  Matrix A = U * sigma.asDiagonal() * V.transpose();
  std::normal_distribution<double> normal;
  Vector x(d);
  for (int i = 0; i < d; ++i) x(i) = normal(eng);
  Vector e(n);
  for (int i = 0; i < n; ++i) e(i) = normal(eng);
  e -= U * (U.transpose() * e);
  const Vector Ax = A * x;
  e *= noise_ratio * Ax.norm() / std::sqrt(static_cast<double>(n)) / e.norm();
  Vector b = Ax + e;
  return LSInstance(std::move(A), std::move(b));
}

/// Low-rank test problem with known factors: sigma_j = 1 for j <= r and
/// 2^{-(j - r)} beyond. `V` keeps the exact right singular vectors so that
/// augmented subspaces can be formed without re-deriving them numerically.
struct SyntheticLowRank {
  LowRankInstance instance;
  Matrix V;
  Vector sigma;
};

inline SyntheticLowRank decaying_tail_instance(int n, int d, int r, RngSeed seed) {
  Engine eng = make_engine(seed);
  const int q = std::min(n, d);
  const Matrix U = random_orthonormal(n, q, eng);
  Matrix V = random_orthonormal(d, q, eng);
  Vector sigma(q);
  for (int j = 0; j < q; ++j) sigma(j) = j < r ? 1.0 : std::ldexp(1.0, -(j + 1 - r));
  Matrix A = U * sigma.asDiagonal() * V.transpose();
  return SyntheticLowRank{LowRankInstance(std::move(A), r), std::move(V), std::move(sigma)};
}

}  // namespace osilab
