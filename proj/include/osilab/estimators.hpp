#pragma once

// Sketched estimators: sketch-and-solve least squares, rangefinder
// randomized SVD, and sketch-and-solve l_p regression.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "osilab/error.hpp"
#include "osilab/linalg.hpp"

namespace osilab {

// ---------------------------------------------------------------------------
// Least squares

/// min_x ||Ax - b||_2 with A full column rank and n > d. The optimum is
/// solved once at construction.
class LSInstance {
 public:
  LSInstance(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
    detail::require(A_.cols() >= 1 && A_.rows() > A_.cols(), ErrorCode::BadParams, "LSInstance: need n > d >= 1");
    detail::require(b_.size() == A_.rows(), ErrorCode::BadParams, "LSInstance: b has wrong length");
    optimum_ = lstsq_exact(A_, b_);
  }

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  const Vector& x_star() const { return optimum_.x; }
  double optimal_residual() const { return optimum_.residual_norm; }
  /// b lies in range(A) up to rounding.
  bool exact_fit() const { return optimum_.residual_norm <= 1e-14 * std::max(1.0, b_.norm()); }

 private:
  Matrix A_;
  Vector b_;
  LstsqSolution optimum_;
};

struct LsSketchResult {
  Vector x_tilde;
  double residual_norm = 0.0;
  /// ||A x_tilde - b|| / ||A x_star - b||; NaN when exact_fit_missed.
  double ratio = 1.0;
  /// Omega^T A lost column rank; x_tilde is the minimum-norm minimizer.
  bool sketch_rank_deficient = false;
  /// b in range(A) but the sketched solution does not reproduce it.
  bool exact_fit_missed = false;
};

namespace detail {

// Minimizer of ||M x - c||_2: QR when M has full column rank, pinv otherwise.
inline std::pair<Vector, bool> solve_small_lstsq(const Matrix& M, const Vector& c) {
  if (M.rows() >= M.cols()) {
    try {
      const QrFactors f = qr_reduced(M);
      const Vector z = f.Q.transpose() * c;
      return {f.R.triangularView<Eigen::Upper>().solve(z), false};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient) throw;
    }
  }
  return {pinv(M) * c, true};
}

}  // namespace detail

inline LsSketchResult sketch_and_solve_ls(const LSInstance& inst, const Matrix& omega) {
  detail::require(omega.rows() == inst.A().rows(), ErrorCode::BadParams,
                  "sketch_and_solve_ls: Omega must have n rows");
  const Matrix SA = omega.transpose() * inst.A();
  const Vector Sb = omega.transpose() * inst.b();
  LsSketchResult out;
  std::tie(out.x_tilde, out.sketch_rank_deficient) = detail::solve_small_lstsq(SA, Sb);
  out.residual_norm = (inst.A() * out.x_tilde - inst.b()).norm();
  if (inst.exact_fit()) {
    const bool hit = out.residual_norm <= 1e-10 * std::max(1.0, inst.b().norm());
    out.exact_fit_missed = !hit;
    out.ratio = hit ? 1.0 : std::numeric_limits<double>::quiet_NaN();
  } else {
    out.ratio = out.residual_norm / inst.optimal_residual();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Randomized SVD

/// Matrix plus target rank 1 <= r < rank(A). The SVD is computed once.
class LowRankInstance {
 public:
  LowRankInstance(Matrix A, Eigen::Index r) : A_(std::move(A)), r_(r), factors_(svd(A_)) {
    rank_ = numerical_rank(factors_, A_.rows(), A_.cols());
    if (r_ < 1 || r_ >= rank_) throw Error(ErrorCode::BadRank, "LowRankInstance: need 1 <= r < rank(A)");
    optimal_error_ = factors_.singular_values.tail(factors_.size() - r_).norm();
  }

  const Matrix& A() const { return A_; }
  Eigen::Index r() const { return r_; }
  Eigen::Index rank() const { return rank_; }
  const SvdFactors& factors() const { return factors_; }
  /// ||A - A_r||_F.
  double optimal_error() const { return optimal_error_; }

 private:
  Matrix A_;
  Eigen::Index r_;
  SvdFactors factors_;
  Eigen::Index rank_ = 0;
  double optimal_error_ = 0.0;
};

struct RsvdResult {
  Matrix A_tilde;
  double error_frob = 0.0;
  /// ||A - A_tilde||_F / ||A - A_r||_F.
  double ratio = 0.0;
};

/// A_tilde = (A Omega)(A Omega)^+ A.
inline RsvdResult rangefinder_rsvd(const LowRankInstance& inst, const Matrix& omega) {
  detail::require(omega.rows() == inst.A().cols(), ErrorCode::BadParams, "rangefinder_rsvd: Omega must have d rows");
  detail::require(omega.cols() >= 1, ErrorCode::BadParams, "rangefinder_rsvd: need k >= 1");
  const Matrix Y = inst.A() * omega;
  RsvdResult out;
  out.A_tilde = Y * (pinv(Y) * inst.A());
  out.error_frob = (inst.A() - out.A_tilde).norm();
  out.ratio = out.error_frob / inst.optimal_error();
  return out;
}

// ---------------------------------------------------------------------------
// l_p regression

struct LpFit {
  Vector x;
  /// ||A x - b||_p at the returned x.
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline double lp_objective(const Matrix& A, const Vector& b, const Vector& x, double p) {
  return lp_norm(A * x - b, p);
}

// For p = 1 an optimum sits where d residuals vanish. Interpolating the d
// smallest residuals of a near-optimal x recovers that vertex exactly.
inline void polish_l1_vertex(const Matrix& A, const Vector& b, LpFit& fit) {
  const Eigen::Index d = A.cols();
  const Vector r = (A * fit.x - b).cwiseAbs();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(r.size()));
  for (Eigen::Index i = 0; i < r.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::partial_sort(order.begin(), order.begin() + d, order.end(),
                    [&](Eigen::Index a, Eigen::Index c) { return r(a) < r(c); });
  Matrix As(d, d);
  Vector bs(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    As.row(i) = A.row(order[static_cast<std::size_t>(i)]);
    bs(i) = b(order[static_cast<std::size_t>(i)]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(As);
  if (!lu.isInvertible()) return;
  const Vector candidate = lu.solve(bs);
  const double obj = lp_objective(A, b, candidate, 1.0);
  if (obj <= fit.objective) {
    fit.x = candidate;
    fit.objective = obj;
  }
}

// IRLS on sum_i (r_i^2 + mu)^{p/2} with mu stepped from 1e-4 to 1e-12, a
// backtracking step on the true objective, and l1 vertex polishing. Does not
// require A to have full column rank; weighted solves fall back to pinv.
inline LpFit lp_regress_irls(const Matrix& A, const Vector& b, double p) {
  constexpr int kMaxIterations = 500;
  constexpr double kTolerance = 1e-10;

  LpFit fit;
  fit.x = solve_small_lstsq(A, b).first;
  fit.objective = lp_objective(A, b, fit.x, p);
  if (p == 2.0) {
    fit.converged = true;
    return fit;
  }

  auto smoothed = [&](const Vector& x, double mu) {
    const Vector r = A * x - b;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) acc += std::pow(r(i) * r(i) + mu, p / 2.0);
    return acc;
  };

  Vector x = fit.x;
  int iterations = 0;
  for (double mu = 1e-4; mu >= 1e-12 * 0.999 && iterations < kMaxIterations; mu *= 0.1) {
    double current = smoothed(x, mu);
    while (iterations < kMaxIterations) {
      ++iterations;
      const Vector r = A * x - b;
      Vector sqrt_w(r.size());
      for (Eigen::Index i = 0; i < r.size(); ++i) sqrt_w(i) = std::pow(r(i) * r(i) + mu, (p - 2.0) / 4.0);
      const Matrix WA = sqrt_w.asDiagonal() * A;
      const Vector Wb = sqrt_w.asDiagonal() * b;
      const Vector target = solve_small_lstsq(WA, Wb).first;
      const Vector direction = target - x;

      double step = 1.0;
      Vector trial = target;
      double value = smoothed(trial, mu);
      while (value > current && step > 1e-8) {
        step *= 0.5;
        trial = x + step * direction;
        value = smoothed(trial, mu);
      }
      if (value > current) break;
      const double decrease = (current - value) / std::max(current, std::numeric_limits<double>::min());
      x = trial;
      current = value;
      const double obj = lp_objective(A, b, x, p);
      if (obj < fit.objective) {
        fit.objective = obj;
        fit.x = x;
      }
      if (decrease < kTolerance) break;
    }
  }
  fit.iterations = iterations;
  fit.converged = iterations < kMaxIterations;
  if (p == 1.0) polish_l1_vertex(A, b, fit);
  return fit;
}

}  // namespace detail

/// argmin_x ||Ax - b||_p for finite p >= 1 and full-column-rank A.
/// `converged` is false when the iteration cap was hit; x is then the best
/// iterate seen.
inline LpFit lp_regress(const Matrix& A, const Vector& b, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorCode::BadExponent, "lp_regress: need finite p >= 1");
  detail::require(b.size() == A.rows(), ErrorCode::BadParams, "lp_regress: size mismatch");
  (void)qr_reduced(A);  // full column rank check
  return detail::lp_regress_irls(A, b, p);
}

class LpInstance {
 public:
  LpInstance(Matrix A, Vector b, double p) : A_(std::move(A)), b_(std::move(b)), p_(p) {
    detail::require(A_.cols() >= 1 && A_.rows() > A_.cols(), ErrorCode::BadParams, "LpInstance: need n > d >= 1");
    optimum_ = lp_regress(A_, b_, p_);
  }

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  double p() const { return p_; }
  const Vector& x_star() const { return optimum_.x; }
  /// min_x ||Ax - b||_p.
  double optimal_objective() const { return optimum_.objective; }
  Vector optimal_residual() const { return A_ * optimum_.x - b_; }
  bool exact_fit() const { return optimum_.objective <= 1e-12 * std::max(1.0, lp_norm(b_, p_)); }

 private:
  Matrix A_;
  Vector b_;
  double p_;
  LpFit optimum_;
};

struct LpSketchResult {
  Vector x_tilde;
  double objective = 0.0;
  double ratio = 1.0;
  bool sketch_rank_deficient = false;
  bool exact_fit_missed = false;
};

inline LpSketchResult lp_sketch_and_solve(const LpInstance& inst, const Matrix& omega) {
  detail::require(omega.rows() == inst.A().rows(), ErrorCode::BadParams,
                  "lp_sketch_and_solve: Omega must have n rows");
  const Matrix SA = omega.transpose() * inst.A();
  const Vector Sb = omega.transpose() * inst.b();
  LpSketchResult out;
  out.sketch_rank_deficient = SA.rows() < SA.cols();
  if (!out.sketch_rank_deficient) {
    try {
      (void)qr_reduced(SA);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient) throw;
      out.sketch_rank_deficient = true;
    }
  }
  out.x_tilde = detail::lp_regress_irls(SA, Sb, inst.p()).x;
  out.objective = detail::lp_objective(inst.A(), inst.b(), out.x_tilde, inst.p());
  if (inst.exact_fit()) {
    const bool hit = out.objective <= 1e-10 * std::max(1.0, lp_norm(inst.b(), inst.p()));
    out.exact_fit_missed = !hit;
    out.ratio = hit ? 1.0 : std::numeric_limits<double>::quiet_NaN();
  } else {
    out.ratio = out.objective / inst.optimal_objective();
  }
  return out;
}

}  // namespace osilab
