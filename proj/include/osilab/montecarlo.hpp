#pragma once

// Seeded trial harness: runs independent trials, aggregates event
// frequencies, and issues verdicts on probability claims.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "osilab/bounds.hpp"
#include "osilab/error.hpp"
#include "osilab/estimators.hpp"
#include "osilab/linalg.hpp"
#include "osilab/rng.hpp"

namespace osilab {

struct TrialRecord {
  std::int64_t index = 0;
  RngSeed seed;
  double ratio = 0.0;
  bool injectivity_held = true;
  std::optional<int> branch_label;
  std::map<std::string, double> aux;

  double get(const std::string& key) const {
    auto it = aux.find(key);
    if (it == aux.end()) throw Error(ErrorCode::BadParams, "trial record has no aux field '" + key + "'");
    return it->second;
  }
};

using TrialFn = std::function<TrialRecord(RngSeed)>;

/// Worker count used when a caller passes 0.
inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs trial(derive_seed(master, i)) for i in [0, N). Output order and
/// content do not depend on `threads`.
inline std::vector<TrialRecord> run_trials(const TrialFn& trial, std::int64_t N, RngSeed master,
                                           unsigned threads = 0) {
  detail::require(N >= 1, ErrorCode::BadParams, "run_trials: need N >= 1");
  std::vector<TrialRecord> out(static_cast<std::size_t>(N));
  auto one = [&](std::int64_t i) {
    const RngSeed seed = derive_seed(master, static_cast<std::uint64_t>(i));
    TrialRecord rec = trial(seed);
    rec.index = i;
    rec.seed = seed;
    out[static_cast<std::size_t>(i)] = std::move(rec);
  };

  const unsigned workers =
      static_cast<unsigned>(std::min<std::int64_t>(threads == 0 ? default_threads() : threads, N));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < N; ++i) one(i);
    return out;
  }

  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  constexpr std::int64_t kChunk = 64;
  auto work = [&] {
    try {
      for (;;) {
        const std::int64_t start = next.fetch_add(kChunk);
        if (start >= N) return;
        const std::int64_t stop = std::min(N, start + kChunk);
        for (std::int64_t i = start; i < stop; ++i) one(i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(N);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

// ---------------------------------------------------------------------------
// Verdicts

enum class Direction {
  at_least,  // P(event) >= claimed
  at_most,   // P(event) <= claimed
  equals,    // P(event) == claimed
  always,    // event holds on every trial
};

enum class Verdict { consistent, violated };

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::at_least: return "at_least";
    case Direction::at_most: return "at_most";
    case Direction::equals: return "equals";
    case Direction::always: return "always";
  }
  return "unknown";
}

inline const char* to_string(Verdict v) { return v == Verdict::consistent ? "consistent" : "violated"; }

struct BoundReport {
  std::optional<Guarantee> bound;
  Direction direction = Direction::at_least;
  double claimed = 0.0;
  /// Empirical frequency of the event.
  double empirical = 0.0;
  double empirical_violation_rate = 0.0;
  double allowed_failure = 0.0;
  double mc_std_error = 0.0;
  std::int64_t trials = 0;
  Verdict verdict = Verdict::consistent;
};

/// Turns an event count into a verdict. Slack is 3 binomial standard errors,
/// except for `always`, which tolerates no failures.
inline BoundReport make_report(std::int64_t hits, std::int64_t N, double claimed, Direction direction) {
  if (N < 1000) throw Error(ErrorCode::TooFewTrials, "verify_probability: need at least 1000 trials");
  BoundReport r;
  r.direction = direction;
  r.claimed = claimed;
  r.trials = N;
  r.empirical = static_cast<double>(hits) / static_cast<double>(N);
  r.mc_std_error = std::sqrt(r.empirical * (1.0 - r.empirical) / static_cast<double>(N));
  switch (direction) {
    case Direction::at_least:
      r.empirical_violation_rate = 1.0 - r.empirical;
      r.allowed_failure = 1.0 - claimed;
      break;
    case Direction::at_most:
      r.empirical_violation_rate = r.empirical;
      r.allowed_failure = claimed;
      break;
    case Direction::equals:
      r.empirical_violation_rate = std::abs(r.empirical - claimed);
      r.allowed_failure = 0.0;
      break;
    case Direction::always:
      r.claimed = 1.0;
      r.empirical_violation_rate = 1.0 - r.empirical;
      r.allowed_failure = 0.0;
      r.verdict = hits == N ? Verdict::consistent : Verdict::violated;
      return r;
  }
  r.verdict = r.empirical_violation_rate > r.allowed_failure + 3.0 * r.mc_std_error ? Verdict::violated
                                                                                     : Verdict::consistent;
  return r;
}

inline BoundReport verify_probability(const std::vector<TrialRecord>& records,
                                      const std::function<bool(const TrialRecord&)>& predicate, double claimed,
                                      Direction direction) {
  std::int64_t hits = 0;
  for (const auto& rec : records)
    if (predicate(rec)) ++hits;
  return make_report(hits, static_cast<std::int64_t>(records.size()), claimed, direction);
}

/// Checks ratio^2 <= rsvd_relative_bound(...).factor with the claimed
/// success probability. Records carry the unsquared Frobenius ratio.
inline BoundReport verify_rsvd_bound(const std::vector<TrialRecord>& records, double alpha, double rho,
                                     int q_minus_r, double eta) {
  const Guarantee g = rsvd_relative_bound(alpha, rho, q_minus_r, eta);
  BoundReport r = verify_probability(
      records, [&](const TrialRecord& t) { return t.ratio * t.ratio <= g.factor; }, g.success_prob,
      Direction::at_least);
  r.bound = g;
  return r;
}

// ---------------------------------------------------------------------------
// Deflation inequality ||A - A~||_F^2 <= ||S2||_F^2 + ||S2 O2 O1^+||_F^2

struct DeflationCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  /// max(0, lhs - rhs).
  double discrepancy = 0.0;
};

inline DeflationCheck deflation_identity_check(const LowRankInstance& inst, const Matrix& omega) {
  const SvdFactors& f = inst.factors();
  const Eigen::Index r = inst.r();
  const Eigen::Index q = f.size();
  const Matrix omega1 = f.V.leftCols(r).transpose() * omega;
  const Matrix omega2 = f.V.rightCols(q - r).transpose() * omega;

  const SvdFactors f1 = svd(omega1);
  if (omega1.rows() > omega1.cols() || numerical_rank(f1, omega1.rows(), omega1.cols()) < r) {
    throw Error(ErrorCode::RankDeficient, "deflation_identity_check: V1^T Omega lacks full row rank");
  }
  const Vector sigma2 = f.singular_values.tail(q - r);
  const Matrix cross = sigma2.asDiagonal() * omega2 * pinv(omega1);

  DeflationCheck out;
  out.rhs = sigma2.squaredNorm() + cross.squaredNorm();
  const double err = rangefinder_rsvd(inst, omega).error_frob;
  out.lhs = err * err;
  out.discrepancy = std::max(0.0, out.lhs - out.rhs);
  return out;
}

// ---------------------------------------------------------------------------
// Order statistics

/// Linear-interpolation quantile, q in [0, 1].
inline double quantile(std::vector<double> values, double q) {
  detail::require(!values.empty(), ErrorCode::BadParams, "quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

/// Standard deviation of the q-quantile over `resamples` bootstrap resamples.
inline double bootstrap_quantile_spread(const std::vector<double>& values, double q, RngSeed seed,
                                        int resamples = 200) {
  detail::require(!values.empty(), ErrorCode::BadParams, "bootstrap: empty sample");
  Engine eng = make_engine(seed);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> estimates;
  estimates.reserve(static_cast<std::size_t>(resamples));
  std::vector<double> sample(values.size());
  for (int b = 0; b < resamples; ++b) {
    for (auto& v : sample) v = values[pick(eng)];
    estimates.push_back(quantile(sample, q));
  }
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= static_cast<double>(estimates.size());
  double var = 0.0;
  for (double e : estimates) var += (e - mean) * (e - mean);
  return std::sqrt(var / static_cast<double>(estimates.size() - 1));
}

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::int64_t> counts;
  std::int64_t underflow = 0;
  std::int64_t overflow = 0;
  std::int64_t total = 0;

  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  double bin_lo(std::size_t i) const { return lo + bin_width() * static_cast<double>(i); }
  double density(std::size_t i) const {
    return static_cast<double>(counts[i]) / (static_cast<double>(total) * bin_width());
  }
};

inline Histogram histogram(const std::vector<double>& values, double lo, double hi, int bins) {
  detail::require(bins >= 1 && hi > lo, ErrorCode::BadParams, "histogram: need bins >= 1 and hi > lo");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  h.total = static_cast<std::int64_t>(values.size());
  for (double v : values) {
    if (v < lo) {
      ++h.underflow;
    } else if (v > hi) {
      ++h.overflow;
    } else {
      auto idx = static_cast<std::size_t>((v - lo) / h.bin_width());
      idx = std::min(idx, h.counts.size() - 1);
      ++h.counts[idx];
    }
  }
  return h;
}

}  // namespace osilab
