#pragma once

// CSV and JSON serialization of trial records, reports and figure tables.
// Doubles are written with 17 significant digits so reruns compare byte for
// byte.

#include <cstdio>
#include <fstream>
#include <filesystem>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "osilab/montecarlo.hpp"
#include "osilab/presets.hpp"

namespace osilab {

using Json = nlohmann::ordered_json;

inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Columns: trial_index, seed, ratio, injectivity_held, branch_label, then
/// the sorted union of aux keys. Missing aux values and labels are empty.
inline void write_records_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  std::set<std::string> keys;
  for (const auto& r : records)
    for (const auto& [k, v] : r.aux) keys.insert(k);
  os << "trial_index,seed,ratio,injectivity_held,branch_label";
  for (const auto& k : keys) os << ',' << k;
  os << '\n';
  for (const auto& r : records) {
    os << r.index << ',' << r.seed.value << ',' << fmt17(r.ratio) << ',' << (r.injectivity_held ? 1 : 0) << ',';
    if (r.branch_label) os << *r.branch_label;
    for (const auto& k : keys) {
      os << ',';
      if (auto it = r.aux.find(k); it != r.aux.end()) os << fmt17(it->second);
    }
    os << '\n';
  }
}

inline Json to_json(const Guarantee& g) {
  return Json{{"factor", g.factor}, {"success_prob", g.success_prob}, {"squared", g.squared}};
}

inline Json to_json(const BoundReport& r) {
  Json j{{"direction", to_string(r.direction)},
         {"claimed", r.claimed},
         {"empirical", r.empirical},
         {"empirical_violation_rate", r.empirical_violation_rate},
         {"allowed_failure", r.allowed_failure},
         {"std_error", r.mc_std_error},
         {"trials", r.trials},
         {"verdict", to_string(r.verdict)}};
  if (r.bound) j["bound"] = to_json(*r.bound);
  return j;
}

/// Top-level fields mirror the headline check; the full list follows.
inline Json report_json(const PresetOutcome& out) {
  const BoundReport& head = out.checks.front().report;
  Json j{{"preset", out.preset},
         {"params", out.params},
         {"N", out.trials},
         {"seed", out.seed.value},
         {"claimed", head.claimed},
         {"empirical", head.empirical},
         {"std_error", head.mc_std_error},
         {"verdict", out.consistent() ? "consistent" : "violated"}};
  j["derived"] = out.derived;
  Json checks = Json::array();
  for (const auto& c : out.checks) {
    Json cj = to_json(c.report);
    cj["name"] = c.name;
    checks.push_back(std::move(cj));
  }
  j["checks"] = std::move(checks);
  return j;
}

inline Json cell_json(const Cell& c) {
  return std::visit([](const auto& v) { return Json(v); }, c);
}

inline std::string cell_csv(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return fmt17(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

inline void write_table_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_csv(row[i]);
    os << '\n';
  }
}

/// Array of row objects keyed by column name.
inline Json table_json(const Table& t) {
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    Json obj = Json::object();
    for (std::size_t i = 0; i < row.size() && i < t.columns.size(); ++i) obj[t.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(obj));
  }
  return rows;
}

inline Json figure_json(const FigureOutcome& fig) {
  Json j{{"figure", fig.figure}, {"params", fig.params}, {"N", fig.trials}, {"seed", fig.seed.value}};
  j["summary"] = fig.summary;
  return j;
}

enum class Format { csv, json };

/// Writes <dir>/<stem>.{csv|json}; returns the path written.
template <class Writer>
std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& stem, const char* ext,
                                 Writer&& writer) {
  std::filesystem::create_directories(dir);
  const auto path = dir / (stem + ext);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  writer(os);
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
  return path;
}

/// Report JSON is always written; records follow `format`.
inline std::vector<std::filesystem::path> write_outcome(const PresetOutcome& out, const std::filesystem::path& dir,
                                                        Format format) {
  std::vector<std::filesystem::path> paths;
  paths.push_back(write_file(dir, out.preset + "_report", ".json",
                             [&](std::ostream& os) { os << report_json(out).dump(2) << '\n'; }));
  if (format == Format::csv) {
    paths.push_back(write_file(dir, out.preset + "_trials", ".csv",
                               [&](std::ostream& os) { write_records_csv(os, out.records); }));
  } else {
    paths.push_back(write_file(dir, out.preset + "_trials", ".json", [&](std::ostream& os) {
      Json rows = Json::array();
      for (const auto& r : out.records) {
        Json row{{"trial_index", r.index},
                 {"seed", r.seed.value},
                 {"ratio", r.ratio},
                 {"injectivity_held", r.injectivity_held},
                 {"branch_label", r.branch_label ? Json(*r.branch_label) : Json(nullptr)}};
        for (const auto& [k, v] : r.aux) row[k] = v;
        rows.push_back(std::move(row));
      }
      os << rows.dump() << '\n';
    }));
  }
  return paths;
}

inline std::vector<std::filesystem::path> write_figure(const FigureOutcome& fig, const std::filesystem::path& dir,
                                                       Format format) {
  std::vector<std::filesystem::path> paths;
  for (const auto& [name, table] : fig.tables) {
    const std::string stem = fig.figure + "_" + name;
    if (format == Format::csv) {
      paths.push_back(write_file(dir, stem, ".csv", [&](std::ostream& os) { write_table_csv(os, table); }));
    } else {
      paths.push_back(write_file(dir, stem, ".json", [&](std::ostream& os) { os << table_json(table).dump() << '\n'; }));
    }
  }
  paths.push_back(write_file(dir, fig.figure + "_meta", ".json",
                             [&](std::ostream& os) { os << figure_json(fig).dump(2) << '\n'; }));
  return paths;
}

}  // namespace osilab
