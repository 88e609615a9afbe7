#pragma once

// Closed-form guarantees. Each returns the bound together with the
// probability it is claimed to hold with.

#include <cmath>

#include "osilab/error.hpp"

namespace osilab {

/// (s, alpha, beta, rho) embedding parameters.
struct OSEParams {
  int s = 1;
  double alpha = 1.0;
  double beta = 1.0;
  double rho = 0.0;
};

struct Guarantee {
  /// Bound on the error ratio (on its square when `squared` is set).
  double factor = 1.0;
  double success_prob = 1.0;
  bool squared = false;
};

/// Injectivity plus isotropy give an OSE with upper distortion
/// beta = alpha + s(1 - alpha + alpha rho)/tau and failure rho + tau.
inline OSEParams implied_ose(int s, double alpha, double rho, double tau) {
  detail::require(s >= 1, ErrorCode::BadParams, "implied_ose: s must be >= 1");
  detail::require(alpha > 0.0 && alpha <= 1.0, ErrorCode::BadParams, "implied_ose: alpha must lie in (0,1]");
  detail::require(rho >= 0.0 && rho < 1.0, ErrorCode::BadParams, "implied_ose: rho must lie in [0,1)");
  if (!(tau > 0.0 && tau < 1.0 - rho)) throw Error(ErrorCode::BadTau, "implied_ose: need 0 < tau < 1 - rho");
  return OSEParams{s, alpha, alpha + s * (1.0 - alpha + alpha * rho) / tau, rho + tau};
}

/// sqrt(beta / alpha), the classical OSE relative-error factor (unsquared).
inline double ose_relative_factor(double alpha, double beta) {
  detail::require(alpha > 0.0 && alpha <= beta, ErrorCode::BadParams, "ose_relative_factor: need 0 < alpha <= beta");
  return std::sqrt(beta / alpha);
}

/// Least squares with injectivity on span(range(A), b) failing w.p. delta.
inline Guarantee ls_relative_bound(double alpha, double delta, double eta) {
  detail::require(alpha > 0.0 && alpha <= 1.0, ErrorCode::BadParams, "ls_relative_bound: alpha must lie in (0,1]");
  detail::require(delta >= 0.0, ErrorCode::BadParams, "ls_relative_bound: delta must be >= 0");
  detail::require(eta > 0.0 && eta < 1.0, ErrorCode::BadParams, "ls_relative_bound: eta must lie in (0,1)");
  detail::require(delta + eta < 1.0, ErrorCode::BadParams, "ls_relative_bound: need delta + eta < 1");
  return Guarantee{1.0 + (1.0 - alpha + alpha * delta) / (4.0 * alpha * eta), 1.0 - delta - eta, true};
}

/// Rangefinder with an (r+1, alpha, rho) injective sketch; q_minus_r tail
/// directions enter through a union bound.
inline Guarantee rsvd_relative_bound(double alpha, double rho, int q_minus_r, double eta) {
  detail::require(alpha > 0.0 && alpha <= 1.0, ErrorCode::BadParams, "rsvd_relative_bound: alpha must lie in (0,1]");
  detail::require(rho >= 0.0 && rho < 1.0, ErrorCode::BadParams, "rsvd_relative_bound: rho must lie in [0,1)");
  detail::require(q_minus_r >= 1, ErrorCode::BadParams, "rsvd_relative_bound: q - r must be >= 1");
  detail::require(eta > 0.0 && eta < 1.0, ErrorCode::BadParams, "rsvd_relative_bound: eta must lie in (0,1)");
  const double delta = q_minus_r * rho;
  detail::require(delta < 1.0, ErrorCode::BadParams, "rsvd_relative_bound: need (q - r) rho < 1");
  detail::require(delta + eta < 1.0, ErrorCode::BadParams, "rsvd_relative_bound: need (q - r) rho + eta < 1");
  return Guarantee{1.0 + (1.0 - alpha + alpha * delta) / (4.0 * alpha * eta), 1.0 - delta - eta, true};
}

/// Deterministic l_p bound: injectivity alpha on range(A) and upper
/// distortion beta on the optimal residual.
inline Guarantee lp_deterministic_bound(double alpha, double beta, double p) {
  detail::require(alpha > 0.0 && beta > 0.0, ErrorCode::BadParams, "lp_deterministic_bound: need alpha, beta > 0");
  detail::require(p >= 1.0 && std::isfinite(p), ErrorCode::BadParams, "lp_deterministic_bound: need finite p >= 1");
  return Guarantee{1.0 + 2.0 * std::pow(beta / alpha, 1.0 / p), 1.0, false};
}

inline Guarantee lp_probabilistic_bound(double alpha, double rho, double p, double t) {
  detail::require(alpha > 0.0 && alpha <= 1.0, ErrorCode::BadParams, "lp_probabilistic_bound: alpha must lie in (0,1]");
  detail::require(rho >= 0.0 && rho < 1.0, ErrorCode::BadParams, "lp_probabilistic_bound: rho must lie in [0,1)");
  detail::require(p >= 1.0 && std::isfinite(p), ErrorCode::BadParams, "lp_probabilistic_bound: need finite p >= 1");
  detail::require(t >= 1.0 && std::isfinite(t), ErrorCode::BadParams, "lp_probabilistic_bound: need t >= 1");
  detail::require(rho + 1.0 / t < 1.0, ErrorCode::BadParams, "lp_probabilistic_bound: need rho + 1/t < 1");
  return Guarantee{1.0 + 2.0 * std::pow(t / alpha, 1.0 / p), 1.0 - rho - 1.0 / t, false};
}

/// The delta form: rho <= delta/2 and t = 2/delta, success >= 1 - delta.
inline Guarantee lp_probabilistic_bound_delta(double alpha, double delta, double p) {
  detail::require(delta > 0.0 && delta < 1.0, ErrorCode::BadParams, "lp_probabilistic_bound: delta must lie in (0,1)");
  detail::require(alpha > 0.0 && alpha <= 1.0, ErrorCode::BadParams, "lp_probabilistic_bound: alpha must lie in (0,1]");
  detail::require(p >= 1.0 && std::isfinite(p), ErrorCode::BadParams, "lp_probabilistic_bound: need finite p >= 1");
  return Guarantee{1.0 + 2.0 * std::pow(2.0 / (alpha * delta), 1.0 / p), 1.0 - delta, false};
}

}  // namespace osilab
