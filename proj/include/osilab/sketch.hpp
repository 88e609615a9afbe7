#pragma once

// Catalog of sketch distributions. Every family draws Omega in R^{n x k}
// normalized so that E[Omega Omega^T] = I_n (or, for the sampler, so that
// E ||Omega^T z||_p^p = ||z||_p^p).

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "osilab/error.hpp"
#include "osilab/linalg.hpp"
#include "osilab/rng.hpp"

namespace osilab {

enum class FamilyName {
  gaussian,
  identity_mix,
  augmented_spike,
  trace_spike,
  expo_rank_one,
  sign_pair,
  sparse_signed,
  lp_sampler,
};

inline constexpr std::array<std::pair<FamilyName, std::string_view>, 8> kFamilyNames{{
    {FamilyName::gaussian, "gaussian"},
    {FamilyName::identity_mix, "identity_mix"},
    {FamilyName::augmented_spike, "augmented_spike"},
    {FamilyName::trace_spike, "trace_spike"},
    {FamilyName::expo_rank_one, "expo_rank_one"},
    {FamilyName::sign_pair, "sign_pair"},
    {FamilyName::sparse_signed, "sparse_signed"},
    {FamilyName::lp_sampler, "lp_sampler"},
}};

inline std::string_view to_string(FamilyName name) {
  for (const auto& [n, s] : kFamilyNames)
    if (n == name) return s;
  return "unknown";
}

inline FamilyName parse_family_name(std::string_view s) {
  for (const auto& [n, str] : kFamilyNames)
    if (str == s) return n;
  throw Error(ErrorCode::BadParams, "unknown sketch family '" + std::string(s) + "'");
}

/// Theoretical (s, alpha, rho) parameters a family is constructed to satisfy.
struct OSIParams {
  int s = 1;
  double alpha = 1.0;
  double rho = 0.0;
  std::optional<double> p;
};

class SketchFamily {
 public:
  using Params = std::map<std::string, double, std::less<>>;

  static SketchFamily gaussian(int n, int k) {
    check_dims(n, k);
    return SketchFamily(FamilyName::gaussian, n, k, {}, std::nullopt);
  }

  static SketchFamily identity_mix(double rho) {
    detail::require(rho >= 0.0 && rho < 1.0, ErrorCode::BadParams, "identity_mix: rho must lie in [0,1)");
    return SketchFamily(FamilyName::identity_mix, 2, 2, {{"rho", rho}}, OSIParams{1, 1.0, rho, {}});
  }

  static SketchFamily augmented_spike(double epsilon, double L) {
    detail::require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::BadParams,
                    "augmented_spike: epsilon must lie in (0,1)");
    detail::require(L >= 1.0 && std::isfinite(L), ErrorCode::BadParams, "augmented_spike: L must be >= 1");
    return SketchFamily(FamilyName::augmented_spike, 2, 3, {{"epsilon", epsilon}, {"L", L}},
                        OSIParams{1, 1.0 - epsilon, 0.0, {}});
  }

  static SketchFamily trace_spike(int s, double alpha, double q) {
    detail::require(s >= 1, ErrorCode::BadParams, "trace_spike: s must be >= 1");
    detail::require(alpha > 0.0 && alpha <= 1.0, ErrorCode::BadParams, "trace_spike: alpha must lie in (0,1]");
    detail::require(q > 0.0 && q < 1.0, ErrorCode::BadParams, "trace_spike: q must lie in (0,1)");
    return SketchFamily(FamilyName::trace_spike, s, s,
                        {{"s", static_cast<double>(s)}, {"alpha", alpha}, {"q", q}},
                        OSIParams{s, alpha, 0.0, {}});
  }

  static SketchFamily expo_rank_one(double alpha) {
    detail::require(alpha > 0.0 && alpha <= 1.0, ErrorCode::BadParams,
                    "expo_rank_one: alpha must lie in (0,1]");
    return SketchFamily(FamilyName::expo_rank_one, 2, 2, {{"alpha", alpha}}, OSIParams{1, alpha, 0.0, {}});
  }

  static SketchFamily sign_pair() {
    return SketchFamily(FamilyName::sign_pair, 2, 1, {}, OSIParams{1, 1.0, 0.5, {}});
  }

  static SketchFamily sparse_signed(int n, int k) {
    check_dims(n, k);
    return SketchFamily(FamilyName::sparse_signed, n, k, {}, std::nullopt);
  }

  static SketchFamily lp_sampler(int n, int k, double p) {
    check_dims(n, k);
    detail::require(p >= 1.0 && std::isfinite(p), ErrorCode::BadParams, "lp_sampler: p must be finite and >= 1");
    return SketchFamily(FamilyName::lp_sampler, n, k, {{"p", p}}, std::nullopt);
  }

  /// Rebuilds a family from its serialized fields, re-running validation.
  static SketchFamily from_fields(FamilyName name, int n, int k, const Params& params) {
    SketchFamily f = build_from_fields(name, n, k, params);
    for (const auto& [key, value] : params) {
      if (!f.params_.contains(key)) throw Error(ErrorCode::BadParams, "unknown parameter '" + key + "'");
    }
    return f;
  }

 private:
  static SketchFamily build_from_fields(FamilyName name, int n, int k, const Params& params) {
    auto get = [&](std::string_view key) {
      auto it = params.find(key);
      if (it == params.end()) throw Error(ErrorCode::BadParams, "missing parameter '" + std::string(key) + "'");
      return it->second;
    };
    auto expect_shape = [&](const SketchFamily& f) {
      if (f.n() != n || f.k() != k) throw Error(ErrorCode::BadParams, "shape does not match family definition");
      return f;
    };
    switch (name) {
      case FamilyName::gaussian: return gaussian(n, k);
      case FamilyName::identity_mix: return expect_shape(identity_mix(get("rho")));
      case FamilyName::augmented_spike: return expect_shape(augmented_spike(get("epsilon"), get("L")));
      case FamilyName::trace_spike:
        return expect_shape(trace_spike(static_cast<int>(get("s")), get("alpha"), get("q")));
      case FamilyName::expo_rank_one: return expect_shape(expo_rank_one(get("alpha")));
      case FamilyName::sign_pair: return expect_shape(sign_pair());
      case FamilyName::sparse_signed: return sparse_signed(n, k);
      case FamilyName::lp_sampler: return lp_sampler(n, k, get("p"));
    }
    throw Error(ErrorCode::BadParams, "unhandled family");
  }

 public:
  FamilyName name() const { return name_; }
  int n() const { return n_; }
  int k() const { return k_; }
  const Params& params() const { return params_; }
  double param(std::string_view key) const {
    auto it = params_.find(key);
    if (it == params_.end()) throw Error(ErrorCode::BadParams, "family has no parameter '" + std::string(key) + "'");
    return it->second;
  }
  const std::optional<OSIParams>& declared() const { return declared_; }

  /// True when isotropy is stated through p-th moments instead of Omega Omega^T.
  bool p_isotropic() const { return name_ == FamilyName::lp_sampler; }

 private:
  SketchFamily(FamilyName name, int n, int k, Params params, std::optional<OSIParams> declared)
      : name_(name), n_(n), k_(k), params_(std::move(params)), declared_(std::move(declared)) {}

  static void check_dims(int n, int k) {
    detail::require(n >= 1 && k >= 1, ErrorCode::BadParams, "sketch dimensions must be >= 1");
  }

  FamilyName name_;
  int n_;
  int k_;
  Params params_;
  std::optional<OSIParams> declared_;
};

struct SketchDraw {
  Matrix omega;
  /// Which component of a finite mixture produced the draw.
  std::optional<int> branch;
};

/// One component of a finite-mixture family.
struct SketchBranch {
  int label = 0;
  double probability = 0.0;
  Matrix omega;
};

namespace detail {

inline Matrix identity_mix_branch(int label) {
  Matrix m(2, 2);
  switch (label) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 1, 0, 1, 0; break;
    default: m << 1, 0, -1, 0; break;
  }
  return m;
}

inline Matrix augmented_spike_branch(double epsilon, double L, int label) {
  const double t = 2.0 * L / epsilon;
  Vector u(2);
  if (label == 0) {
    const double a = std::sqrt(t / 2.0);
    u << a, a;
  } else {
    const double a = std::sqrt(t / (2.0 * (t - 1.0)));
    u << a, -a;
  }
  Matrix m(2, 3);
  const double c = std::sqrt(1.0 - epsilon);
  m << c, 0.0, std::sqrt(epsilon) * u(0), 0.0, c, std::sqrt(epsilon) * u(1);
  return m;
}

// label 0: no spike; label j >= 1: spike on coordinate j-1.
inline Matrix trace_spike_branch(int s, double alpha, double q, int label) {
  Matrix S = Matrix::Identity(s, s) * alpha;
  if (label > 0) S(label - 1, label - 1) += s * (1.0 - alpha) / q;
  return sym_sqrt(S);
}

inline Matrix sign_pair_branch(int label) {
  Matrix m(2, 1);
  m << 1.0, (label == 0 ? 1.0 : -1.0);
  return m;
}

inline double uniform01(Engine& eng) { return std::uniform_real_distribution<double>(0.0, 1.0)(eng); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Draws. Each is a pure function of its parameters and seed.

inline SketchDraw draw_gaussian(int n, int k, RngSeed seed) {
  const auto fam = SketchFamily::gaussian(n, k);
  Engine eng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(fam.k())));
  Matrix m(n, k);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(eng);
  return {std::move(m), std::nullopt};
}

inline SketchDraw draw_identity_mix(double rho, RngSeed seed) {
  (void)SketchFamily::identity_mix(rho);
  Engine eng = make_engine(seed);
  const double u = detail::uniform01(eng);
  const int label = u < 1.0 - rho ? 0 : (u < 1.0 - rho / 2.0 ? 1 : 2);
  return {detail::identity_mix_branch(label), label};
}

inline SketchDraw draw_augmented_spike(double epsilon, double L, RngSeed seed) {
  (void)SketchFamily::augmented_spike(epsilon, L);
  Engine eng = make_engine(seed);
  const double t = 2.0 * L / epsilon;
  const int label = detail::uniform01(eng) < 1.0 / t ? 0 : 1;
  return {detail::augmented_spike_branch(epsilon, L, label), label};
}

inline SketchDraw draw_trace_spike(int s, double alpha, double q, RngSeed seed) {
  (void)SketchFamily::trace_spike(s, alpha, q);
  Engine eng = make_engine(seed);
  const bool spike = detail::uniform01(eng) < q;
  const int j = std::uniform_int_distribution<int>(0, s - 1)(eng);
  const int label = spike ? j + 1 : 0;
  return {detail::trace_spike_branch(s, alpha, q, label), label};
}

inline SketchDraw draw_expo_rank_one(double alpha, RngSeed seed) {
  (void)SketchFamily::expo_rank_one(alpha);
  Engine eng = make_engine(seed);
  const double theta = 2.0 * std::numbers::pi * detail::uniform01(eng);
  const double mean = 2.0 * (1.0 - alpha);
  const double T = mean > 0.0 ? std::exponential_distribution<double>(1.0 / mean)(eng) : 0.0;
  Vector u(2);
  u << std::cos(theta), std::sin(theta);
  const Matrix S = alpha * Matrix::Identity(2, 2) + T * u * u.transpose();
  return {sym_sqrt(S), std::nullopt};
}

inline SketchDraw draw_sign_pair(RngSeed seed) {
  Engine eng = make_engine(seed);
  const int label = detail::uniform01(eng) < 0.5 ? 0 : 1;
  return {detail::sign_pair_branch(label), label};
}

inline SketchDraw draw_sparse_signed(int n, int k, RngSeed seed) {
  (void)SketchFamily::sparse_signed(n, k);
  Engine eng = make_engine(seed);
  std::uniform_int_distribution<int> quarter(0, 3);
  const double scale = std::sqrt(2.0) / std::sqrt(static_cast<double>(k));
  Matrix m(n, k);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const int c = quarter(eng);
    m.data()[i] = c == 0 ? scale : (c == 1 ? -scale : 0.0);
  }
  return {std::move(m), std::nullopt};
}

inline SketchDraw draw_lp_sampler(int n, int k, double p, RngSeed seed) {
  (void)SketchFamily::lp_sampler(n, k, p);
  Engine eng = make_engine(seed);
  std::uniform_int_distribution<int> index(0, n - 1);
  const double scale = std::pow(static_cast<double>(n) / k, 1.0 / p);
  Matrix m = Matrix::Zero(n, k);
  for (int j = 0; j < k; ++j) m(index(eng), j) = scale;
  return {std::move(m), std::nullopt};
}

inline SketchDraw draw(const SketchFamily& f, RngSeed seed) {
  switch (f.name()) {
    case FamilyName::gaussian: return draw_gaussian(f.n(), f.k(), seed);
    case FamilyName::identity_mix: return draw_identity_mix(f.param("rho"), seed);
    case FamilyName::augmented_spike: return draw_augmented_spike(f.param("epsilon"), f.param("L"), seed);
    case FamilyName::trace_spike:
      return draw_trace_spike(f.n(), f.param("alpha"), f.param("q"), seed);
    case FamilyName::expo_rank_one: return draw_expo_rank_one(f.param("alpha"), seed);
    case FamilyName::sign_pair: return draw_sign_pair(seed);
    case FamilyName::sparse_signed: return draw_sparse_signed(f.n(), f.k(), seed);
    case FamilyName::lp_sampler: return draw_lp_sampler(f.n(), f.k(), f.param("p"), seed);
  }
  throw Error(ErrorCode::BadParams, "unhandled family");
}

/// Exact component list for finite-mixture families; nullopt otherwise.
inline std::optional<std::vector<SketchBranch>> finite_branches(const SketchFamily& f) {
  std::vector<SketchBranch> out;
  switch (f.name()) {
    case FamilyName::identity_mix: {
      const double rho = f.param("rho");
      out.push_back({0, 1.0 - rho, detail::identity_mix_branch(0)});
      out.push_back({1, rho / 2.0, detail::identity_mix_branch(1)});
      out.push_back({2, rho / 2.0, detail::identity_mix_branch(2)});
      return out;
    }
    case FamilyName::augmented_spike: {
      const double eps = f.param("epsilon");
      const double L = f.param("L");
      const double t = 2.0 * L / eps;
      out.push_back({0, 1.0 / t, detail::augmented_spike_branch(eps, L, 0)});
      out.push_back({1, 1.0 - 1.0 / t, detail::augmented_spike_branch(eps, L, 1)});
      return out;
    }
    case FamilyName::trace_spike: {
      const int s = f.n();
      const double alpha = f.param("alpha");
      const double q = f.param("q");
      out.push_back({0, 1.0 - q, detail::trace_spike_branch(s, alpha, q, 0)});
      for (int j = 1; j <= s; ++j) out.push_back({j, q / s, detail::trace_spike_branch(s, alpha, q, j)});
      return out;
    }
    case FamilyName::sign_pair:
      out.push_back({0, 0.5, detail::sign_pair_branch(0)});
      out.push_back({1, 0.5, detail::sign_pair_branch(1)});
      return out;
    default:
      return std::nullopt;
  }
}

/// sum_i p_i Omega_i Omega_i^T over an enumerated mixture.
inline Matrix mixture_gram_mean(const std::vector<SketchBranch>& branches) {
  const auto n = branches.front().omega.rows();
  Matrix acc = Matrix::Zero(n, n);
  for (const auto& b : branches) acc += b.probability * (b.omega * b.omega.transpose());
  return acc;
}

// ---------------------------------------------------------------------------
// Empirical property checks.

/// Max entrywise |mean(Omega Omega^T) - I| over N draws, or for p-isotropic
/// families the max relative error of the mean p-th moment over 100 random z.
inline double check_isotropy(const SketchFamily& f, std::int64_t N, RngSeed seed) {
  detail::require(N >= 1000, ErrorCode::BadParams, "check_isotropy: need N >= 1000");
  const int n = f.n();
  if (f.p_isotropic()) {
    const double p = f.param("p");
    constexpr int kProbes = 100;
    Engine zeng = make_engine(RngSeed{mix64(seed.value ^ 0x5eedf00dULL)});
    std::normal_distribution<double> normal;
    Matrix Z(n, kProbes);
    for (Eigen::Index i = 0; i < Z.size(); ++i) Z.data()[i] = normal(zeng);
    Vector acc = Vector::Zero(kProbes);
    for (std::int64_t t = 0; t < N; ++t) {
      const Matrix omega = draw(f, derive_seed(seed, static_cast<std::uint64_t>(t))).omega;
      const Matrix sketched = omega.transpose() * Z;
      for (int j = 0; j < kProbes; ++j) acc(j) += lp_norm_pow(sketched.col(j), p);
    }
    double worst = 0.0;
    for (int j = 0; j < kProbes; ++j) {
      const double truth = lp_norm_pow(Z.col(j), p);
      worst = std::max(worst, std::abs(acc(j) / static_cast<double>(N) - truth) / truth);
    }
    return worst;
  }
  Matrix acc = Matrix::Zero(n, n);
  for (std::int64_t t = 0; t < N; ++t) {
    const Matrix omega = draw(f, derive_seed(seed, static_cast<std::uint64_t>(t))).omega;
    acc.noalias() += omega * omega.transpose();
  }
  acc /= static_cast<double>(N);
  return (acc - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

/// Injectivity event on range(U): gram_min_eig(U, Omega) >= alpha - 1e-12.
inline bool injective_on(const Matrix& U, const Matrix& omega, double alpha) {
  return gram_min_eig(U, omega) >= alpha - 1e-12;
}

/// Fraction of N draws on which the injectivity event on range(U) fails.
inline double check_injectivity(const SketchFamily& f, const Matrix& U, std::int64_t N, double alpha,
                                RngSeed seed) {
  detail::require(N >= 1, ErrorCode::BadParams, "check_injectivity: need N >= 1");
  detail::require(U.rows() == f.n(), ErrorCode::BadParams, "check_injectivity: U has wrong row count");
  if (orthonormality_defect(U) > 1e-8) throw Error(ErrorCode::NotOrthonormal, "check_injectivity: U");
  std::int64_t failures = 0;
  for (std::int64_t t = 0; t < N; ++t) {
    const Matrix omega = draw(f, derive_seed(seed, static_cast<std::uint64_t>(t))).omega;
    if (!injective_on(U, omega, alpha)) ++failures;
  }
  return static_cast<double>(failures) / static_cast<double>(N);
}

/// min over v in range(basis) of ||Omega^T v||_p^p / ||v||_p^p. Exact when
/// the subspace is one-dimensional or p = 2 (basis must then be orthonormal);
/// otherwise the minimum over `probes` random directions, which can only
/// overestimate the true infimum.
inline double lp_injectivity_ratio(const Matrix& basis, const Matrix& omega, double p, int probes = 4096,
                                   RngSeed seed = RngSeed{0x1a2b3c4dULL}) {
  detail::require(basis.rows() == omega.rows(), ErrorCode::BadParams, "lp_injectivity_ratio: shape mismatch");
  if (basis.cols() == 1) {
    const Vector v = basis.col(0);
    const Vector sv = omega.transpose() * v;
    return lp_norm_pow(sv, p) / lp_norm_pow(v, p);
  }
  if (p == 2.0) return gram_min_eig(basis, omega);
  Engine eng = make_engine(seed);
  std::normal_distribution<double> normal;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < probes; ++i) {
    Vector c(basis.cols());
    for (Eigen::Index j = 0; j < c.size(); ++j) c(j) = normal(eng);
    const Vector v = basis * c;
    const Vector sv = omega.transpose() * v;
    best = std::min(best, lp_norm_pow(sv, p) / lp_norm_pow(v, p));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Plain-text key=value descriptors.

struct FamilyConfig {
  SketchFamily family;
  RngSeed seed;
};

namespace detail {

inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& text, std::string_view key) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::BadParams, "bad value for '" + std::string(key) + "': " + text);
  }
  return value;
}

}  // namespace detail

inline std::string to_config(const SketchFamily& f, RngSeed seed) {
  std::ostringstream out;
  out << "name=" << to_string(f.name()) << '\n';
  out << "n=" << f.n() << '\n';
  out << "k=" << f.k() << '\n';
  for (const auto& [key, value] : f.params()) out << key << '=' << detail::format_double(value) << '\n';
  out << "seed=" << seed.value << '\n';
  return out.str();
}

/// Inverse of to_config. Blank lines and lines starting with '#' are skipped.
inline FamilyConfig parse_config(std::string_view text) {
  std::optional<FamilyName> name;
  std::optional<int> n;
  std::optional<int> k;
  RngSeed seed{};
  SketchFamily::Params params;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string stripped = detail::trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::BadParams, "config line without '=': " + stripped);
    const std::string key = detail::trim(std::string_view(stripped).substr(0, eq));
    const std::string value = detail::trim(std::string_view(stripped).substr(eq + 1));
    if (key == "name") {
      name = parse_family_name(value);
    } else if (key == "n") {
      n = detail::parse_number<int>(value, key);
    } else if (key == "k") {
      k = detail::parse_number<int>(value, key);
    } else if (key == "seed") {
      seed.value = detail::parse_number<std::uint64_t>(value, key);
    } else {
      params[key] = detail::parse_number<double>(value, key);
    }
  }
  if (!name || !n || !k) throw Error(ErrorCode::BadParams, "config needs name, n and k");
  return {SketchFamily::from_fields(*name, *n, *k, params), seed};
}

}  // namespace osilab
