// osilab: run theorem presets and figure reproductions, print bound values.
//
//   osilab theorem ls-counterexample --rho 0.3 -N 100000 --seed 42 --out out/
//   osilab figure fig2 -N 10000
//   osilab bounds ls --alpha 0.9 --delta 0 --eta 0.1
//
// Exit status: 0 consistent, 1 verdict violated, 2 usage error.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "osilab/bounds.hpp"
#include "osilab/io.hpp"
#include "osilab/presets.hpp"

namespace {

constexpr int kExitConsistent = 0;
constexpr int kExitViolated = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string preset;
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> seed;
  std::string out = "osilab_out";
  std::string format = "csv";
  unsigned threads = 0;
  osilab::PresetParams params;
  std::optional<double> delta, beta;
  std::optional<int> q_minus_r;
};

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("OSILAB_SEED")) {
    try {
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(env, &used, 0);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw CLI::ValidationError("OSILAB_SEED", std::string("not an unsigned integer: ") + env);
  }
  return 0;
}

void add_param_flags(CLI::App& app, Options& o) {
  auto& p = o.params;
  app.add_option("--rho", p.rho, "failure probability");
  app.add_option("--alpha", p.alpha, "injectivity constant");
  app.add_option("--epsilon", p.epsilon, "spike weight");
  app.add_option("--L", p.L, "loss parameter");
  app.add_option("--tau", p.tau, "tail level / Markov level");
  app.add_option("--eta", p.eta, "slack probability");
  app.add_option("--p", p.p, "exponent of the l_p objective")->check(CLI::Range(1.0, 1e9));
  app.add_option("--t", p.t, "Markov multiplier");
  app.add_option("--q", p.q, "heavy-branch probability");
  app.add_option("--s", p.s, "subspace dimension")->check(CLI::PositiveNumber);
}

void add_run_flags(CLI::App& app, Options& o) {
  app.add_option("-N", o.trials, "number of trials")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "master seed (default: $OSILAB_SEED, else 0)");
  app.add_option("--out", o.out, "output directory")->capture_default_str();
  app.add_option("--format", o.format, "trial/table file format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--threads", o.threads, "worker cap (0 = all cores)");
}

osilab::Format format_of(const Options& o) { return o.format == "json" ? osilab::Format::json : osilab::Format::csv; }

void print_report(const osilab::PresetOutcome& out) {
  std::cout << out.preset << "  N=" << out.trials << "  seed=" << out.seed.value << '\n';
  for (const auto& [k, v] : out.derived) std::cout << "  " << k << " = " << osilab::fmt17(v) << '\n';
  for (const auto& c : out.checks) {
    const auto& r = c.report;
    std::cout << "  [" << osilab::to_string(r.verdict) << "] " << c.name << ": " << osilab::to_string(r.direction)
              << " claimed=" << r.claimed << " empirical=" << r.empirical << " (se " << r.mc_std_error << ")";
    if (r.bound) std::cout << " factor=" << r.bound->factor;
    std::cout << '\n';
  }
}

int cmd_theorem(const Options& o) {
  const auto seed = osilab::RngSeed{resolve_seed(o)};
  const auto out = osilab::run_theorem(o.preset, o.params, o.trials.value_or(10000), seed, o.threads);
  print_report(out);
  for (const auto& path : osilab::write_outcome(out, o.out, format_of(o))) std::cout << "wrote " << path.string() << '\n';
  return out.consistent() ? kExitConsistent : kExitViolated;
}

int cmd_figure(const Options& o) {
  const auto seed = osilab::RngSeed{resolve_seed(o)};
  const std::int64_t default_n = o.preset == "fig1" ? 100 : 10000;
  const auto fig = osilab::run_figure(o.preset, o.trials.value_or(default_n), seed, o.threads);
  for (const auto& [k, v] : fig.summary) std::cout << "  " << k << " = " << osilab::fmt17(v) << '\n';
  for (const auto& path : osilab::write_figure(fig, o.out, format_of(o))) std::cout << "wrote " << path.string() << '\n';
  return kExitConsistent;
}

template <class T>
T need(const std::optional<T>& v, const char* flag) {
  if (!v) throw CLI::RequiredError(flag);
  return *v;
}

void print_guarantee(const osilab::Guarantee& g) {
  std::cout << "factor = " << osilab::fmt17(g.factor) << '\n'
            << "success_prob = " << osilab::fmt17(g.success_prob) << '\n'
            << "squared = " << (g.squared ? "true" : "false") << '\n';
}

int cmd_bounds(const Options& o) {
  const auto& p = o.params;
  const std::string& which = o.preset;
  if (which == "ls") {
    print_guarantee(osilab::ls_relative_bound(need(p.alpha, "--alpha"), need(o.delta, "--delta"), need(p.eta, "--eta")));
  } else if (which == "rsvd") {
    print_guarantee(osilab::rsvd_relative_bound(need(p.alpha, "--alpha"), need(p.rho, "--rho"),
                                                need(o.q_minus_r, "--q-minus-r"), need(p.eta, "--eta")));
  } else if (which == "lp-det") {
    print_guarantee(osilab::lp_deterministic_bound(need(p.alpha, "--alpha"), need(o.beta, "--beta"), need(p.p, "--p")));
  } else if (which == "lp-prob") {
    if (p.t) {
      print_guarantee(osilab::lp_probabilistic_bound(need(p.alpha, "--alpha"), need(p.rho, "--rho"), need(p.p, "--p"), *p.t));
    } else {
      print_guarantee(osilab::lp_probabilistic_bound_delta(need(p.alpha, "--alpha"), need(o.delta, "--delta"), need(p.p, "--p")));
    }
  } else if (which == "implied-ose") {
    const auto r = osilab::implied_ose(need(p.s, "--s"), need(p.alpha, "--alpha"), need(p.rho, "--rho"), need(p.tau, "--tau"));
    std::cout << "s = " << r.s << "\nalpha = " << osilab::fmt17(r.alpha) << "\nbeta = " << osilab::fmt17(r.beta)
              << "\nrho = " << osilab::fmt17(r.rho) << '\n';
  } else {  // ose-factor
    std::cout << "factor = " << osilab::fmt17(osilab::ose_relative_factor(need(p.alpha, "--alpha"), need(o.beta, "--beta")))
              << '\n';
  }
  return kExitConsistent;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OSI randomized-sketching laboratory"};
  app.require_subcommand(1);
  Options o;

  auto* theorem = app.add_subcommand("theorem", "run a theorem preset and issue a verdict");
  std::vector<std::string> theorem_names(osilab::kTheoremPresets.begin(), osilab::kTheoremPresets.end());
  theorem->add_option("name", o.preset, "preset name")->required();
  add_run_flags(*theorem, o);
  add_param_flags(*theorem, o);

  auto* figure = app.add_subcommand("figure", "write data files for a figure");
  figure->add_option("name", o.preset, "fig1, fig2 or fig3")->required();
  add_run_flags(*figure, o);

  auto* bounds = app.add_subcommand("bounds", "evaluate a guarantee");
  bounds->add_option("kind", o.preset, "ls, rsvd, lp-det, lp-prob, implied-ose, ose-factor")
      ->required()
      ->check(CLI::IsMember({"ls", "rsvd", "lp-det", "lp-prob", "implied-ose", "ose-factor"}));
  add_param_flags(*bounds, o);
  bounds->add_option("--delta", o.delta, "failure probability of the injectivity event");
  bounds->add_option("--beta", o.beta, "upper distortion");
  bounds->add_option("--q-minus-r", o.q_minus_r, "number of tail directions")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*theorem) return cmd_theorem(o);
    if (*figure) return cmd_figure(o);
    return cmd_bounds(o);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const osilab::Error& e) {
    std::cerr << "error (" << osilab::to_string(e.code()) << "): " << e.what() << '\n';
    if (e.code() == osilab::ErrorCode::UnknownPreset) {
      std::cerr << "known theorem presets:";
      for (auto n : osilab::kTheoremPresets) std::cerr << ' ' << n;
      std::cerr << "\nknown figures: fig1 fig2 fig3\n";
    }
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
