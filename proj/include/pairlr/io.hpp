#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pairlr/core.hpp"
#include "pairlr/counts.hpp"
#include "pairlr/intervals.hpp"
#include "pairlr/samplesize.hpp"
#include "pairlr/simulation.hpp"

namespace pairlr {

using nlohmann::json;

inline constexpr std::array<std::string_view, 8> kCellNames = {"s11", "s10", "s01", "s00",
                                                                "r11", "r10", "r01", "r00"};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ParseError, where + ": " + what);
}

inline std::uint64_t json_count(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) parse_fail(where, "negative count " + v.dump());
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d < 0) parse_fail(where, "negative count " + v.dump());
    if (d != std::floor(d) || d > 9.0e15) parse_fail(where, "non-integer count " + v.dump());
    return static_cast<std::uint64_t>(d);
  }
  parse_fail(where, "expected a non-negative integer, got " + v.dump());
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',' || c == ';' || c == '\t') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline std::optional<std::uint64_t> csv_count(const std::string& field, const std::string& where) {
  if (field.empty()) parse_fail(where, "empty cell");
  if (field[0] == '-') parse_fail(where, "negative count '" + field + "'");
  std::size_t pos = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(field, &pos);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (pos != field.size()) {
    // "12.0" is tolerated, "12.5" is not.
    const std::string rest = field.substr(pos);
    if (rest[0] == '.' && rest.find_first_not_of('0', 1) == std::string::npos) return v;
    parse_fail(where, "non-integer count '" + field + "'");
  }
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string fixed(double v, int decimals) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace detail

/// {"design": "paired", "s11": ..., "r00": ...}; `design` is optional.
inline PairedCounts counts_from_json(const json& j) {
  if (!j.is_object()) detail::parse_fail("counts", "expected a JSON object");
  PairedCounts t;
  std::array<std::uint64_t, 8> c{};
  for (std::size_t i = 0; i < 8; ++i) {
    const std::string key(kCellNames[i]);
    if (!j.contains(key)) detail::parse_fail("field '" + key + "'", "missing");
    c[i] = detail::json_count(j.at(key), "field '" + key + "'");
  }
  Design d = Design::Paired;
  if (j.contains("design")) {
    if (!j.at("design").is_string()) detail::parse_fail("field 'design'", "expected a string");
    d = design_from_string(j.at("design").get<std::string>());
  }
  t = PairedCounts::from_cells(c, d);
  if (t.diseased() == 0) detail::parse_fail("counts", "no diseased subjects (s = 0)");
  if (t.healthy() == 0) detail::parse_fail("counts", "no non-diseased subjects (r = 0)");
  return t;
}

inline PairedCounts parse_counts_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("JSON: ") + e.what());
  }
  return counts_from_json(j);
}

/// Table layout: one row for D=1 and one for D=0, each with the four
/// outcome columns (T1,T2) = (1,1), (1,0), (0,1), (0,0).
///
/// A row is either `label,c11,c10,c01,c00[,total]` with label 1/0 or D=1/D=0,
/// or four bare counts (diseased row first). Rows whose first field is not
/// numeric (headers, a "Total" row), blank lines and '#' comments are skipped.
/// A total column, when present, must equal the row sum.
inline PairedCounts parse_counts_csv(std::string_view text, Design design = Design::Paired) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::array<std::uint64_t, 4>> rows[2];
  std::size_t unlabeled = 0;
  auto is_numeric = [](const std::string& f) {
    return !f.empty() && (std::isdigit(static_cast<unsigned char>(f[0])) != 0 || f[0] == '-' || f[0] == '+' || f[0] == '.');
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> f = detail::split_fields(t);
    if (f.size() > 1 && f.back().empty()) f.pop_back();
    const std::string where_line = "line " + std::to_string(lineno);

    std::string lab = f[0];
    if (lab.rfind("D=", 0) == 0 || lab.rfind("d=", 0) == 0) lab = detail::trim(lab.substr(2));
    const bool labeled = (f.size() == 5 || f.size() == 6) && (lab == "1" || lab == "0");
    if (!labeled && !is_numeric(f[0])) continue;
    if (!labeled && f.size() != 4) {
      detail::parse_fail(where_line, "expected four counts, optionally preceded by a D label and followed by a total; got " +
                                         std::to_string(f.size()) + " fields");
    }
    const std::size_t first = labeled ? 1 : 0;
    std::array<std::uint64_t, 4> row{};
    for (std::size_t k = 0; k < 4; ++k) {
      const std::string where = where_line + ", field " + std::to_string(first + k + 1);
      auto v = detail::csv_count(f[first + k], where);
      if (!v) detail::parse_fail(where, "expected a non-negative integer, got '" + f[first + k] + "'");
      row[k] = *v;
    }
    if (f.size() == 6) {
      const std::string where = where_line + ", field 6";
      auto total = detail::csv_count(f[5], where);
      if (!total) detail::parse_fail(where, "expected a non-negative integer total, got '" + f[5] + "'");
      if (*total != row[0] + row[1] + row[2] + row[3]) detail::parse_fail(where, "total does not equal the row sum");
    }
    int slot = 0;
    if (labeled) {
      slot = lab == "1" ? 0 : 1;
    } else {
      if (unlabeled >= 2) detail::parse_fail(where_line, "more than two data rows");
      slot = static_cast<int>(unlabeled++);
    }
    if (rows[slot]) detail::parse_fail(where_line, std::string("duplicate row for D=") + (slot == 0 ? "1" : "0"));
    rows[slot] = row;
  }
  if (!rows[0]) detail::parse_fail("CSV", "missing the D=1 row");
  if (!rows[1]) detail::parse_fail("CSV", "missing the D=0 row");
  PairedCounts c{(*rows[0])[0], (*rows[0])[1], (*rows[0])[2], (*rows[0])[3],
                 (*rows[1])[0], (*rows[1])[1], (*rows[1])[2], (*rows[1])[3], design};
  if (c.diseased() == 0) detail::parse_fail("CSV", "no diseased subjects (s = 0)");
  if (c.healthy() == 0) detail::parse_fail("CSV", "no non-diseased subjects (r = 0)");
  return c;
}

/// Dispatches on extension (.json / anything else as CSV). An explicit
/// `design` overrides the one stored in the file.
inline PairedCounts load_counts(const std::string& path, std::optional<Design> design = std::nullopt) {
  const std::string text = detail::read_file(path);
  if (detail::trim(text).empty()) throw Error(ErrorKind::ParseError, "'" + path + "' is empty");
  const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  PairedCounts c = is_json ? parse_counts_json(text) : parse_counts_csv(text);
  if (design) c.design = *design;
  return c;
}

inline json to_json(const PairedCounts& c) {
  json j;
  j["design"] = std::string(to_string(c.design));
  const auto cells = c.cells();
  for (std::size_t i = 0; i < 8; ++i) j[std::string(kCellNames[i])] = cells[i];
  return j;
}

inline json to_json(const IntervalResult& r) {
  json j;
  j["method"] = std::string(to_string(r.method));
  j["target"] = std::string(to_string(r.target));
  j["level"] = r.level;
  j["lower"] = detail::number_or_null(r.lower);
  j["upper"] = detail::number_or_null(r.upper);
  j["valid"] = r.valid;
  j["point_estimate"] = detail::number_or_null(r.point_estimate);
  j["notes"] = r.notes;
  if (r.resampled_mean) j["resampled_mean"] = *r.resampled_mean;
  return j;
}

inline json to_json(const SampleSizeResult& r) {
  return json{{"n", r.n},
              {"n_exact", r.n_exact},
              {"bracket", r.bracket},
              {"delta_effective", r.delta_effective},
              {"omega", r.omega},
              {"notes", r.notes}};
}

/// One block of a scenario grid: fixed parameters crossed with every n and
/// target listed.
struct ScenarioSpec {
  std::string name;
  AccuracyParams params;
  std::optional<double> k;
  std::vector<std::uint64_t> sizes;
  std::vector<Target> targets;
};

struct SimulationConfig {
  std::vector<ScenarioSpec> scenarios;
  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  StudyOptions options;
  /// Absent when the config did not pin a seed.
  std::optional<std::uint64_t> seed;

  /// Every (block, n, target) cell, in file order.
  std::vector<Scenario> expand() const {
    std::vector<Scenario> out;
    for (const ScenarioSpec& s : scenarios) {
      for (std::uint64_t n : s.sizes) {
        for (Target t : s.targets) out.push_back(Scenario{s.name, s.params, n, t, s.k});
      }
    }
    return out;
  }
};

namespace detail {

inline double json_real(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) parse_fail(where, "missing '" + key + "'");
  if (!j.at(key).is_number()) parse_fail(where + ", field '" + key + "'", "expected a number");
  return j.at(key).get<double>();
}

inline std::uint64_t json_size(const json& v, const std::string& where) {
  const std::uint64_t n = json_count(v, where);
  if (n < 1) parse_fail(where, "must be at least 1");
  return n;
}

inline std::vector<Method> parse_methods(const json& v, const std::string& where) {
  std::vector<Method> out;
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (tok == "all") return {kAllMethods.begin(), kAllMethods.end()};
      if (!tok.empty()) out.push_back(method_from_string(tok));
    }
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_string()) parse_fail(where, "method names must be strings");
      out.push_back(method_from_string(e.get<std::string>()));
    }
  } else {
    parse_fail(where, "expected a list of method names");
  }
  return out;
}

inline std::vector<Target> parse_targets(const json& v, const std::string& where) {
  std::vector<Target> out;
  auto add = [&](const std::string& s) {
    if (s == "both") {
      out.push_back(Target::OmegaPos);
      out.push_back(Target::OmegaNeg);
    } else {
      out.push_back(target_from_string(s));
    }
  };
  if (v.is_string()) add(v.get<std::string>());
  else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_string()) parse_fail(where, "targets must be strings");
      add(e.get<std::string>());
    }
  } else {
    parse_fail(where, "expected \"pos\", \"neg\", \"both\" or a list");
  }
  return out;
}

}  // namespace detail

/// Scenario-grid configuration.
///
///   {"seed": 7, "replicates": 2000, "B": 500, "M": 2000, "level": 0.95,
///    "methods": ["logarithmic", "wald"],
///    "scenarios": [{"name": "t2", "se1": 0.95, "sp1": 0.90, "se2": 0.90,
///                   "sp2": 0.80, "pi": 0.10, "k": 0.25 | "eps1": .., "eps0": ..,
///                   "n": [50, 1000], "targets": "both"}]}
///
/// "methods" is global; a per-scenario list is rejected.
inline SimulationConfig simulation_config_from_json(const json& j) {
  if (!j.is_object()) detail::parse_fail("config", "expected a JSON object");
  SimulationConfig cfg;
  if (j.contains("seed")) cfg.seed = detail::json_count(j.at("seed"), "field 'seed'");
  for (const char* key : {"replicates", "N"}) {
    if (j.contains(key)) cfg.options.replicates = detail::json_size(j.at(key), std::string("field '") + key + "'");
  }
  if (j.contains("B")) cfg.options.bootstrap_B = detail::json_size(j.at("B"), "field 'B'");
  if (j.contains("M")) cfg.options.bayes_M = detail::json_size(j.at("M"), "field 'M'");
  if (j.contains("level")) cfg.options.level = detail::json_real(j, "level", "config");
  if (j.contains("threads")) cfg.options.threads = static_cast<unsigned>(detail::json_count(j.at("threads"), "field 'threads'"));
  if (j.contains("methods")) cfg.methods = detail::parse_methods(j.at("methods"), "field 'methods'");
  if (!j.contains("scenarios")) return cfg;
  const json& list = j.at("scenarios");
  if (!list.is_array()) detail::parse_fail("field 'scenarios'", "expected an array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const json& s = list[i];
    const std::string where = "scenario " + std::to_string(i + 1);
    if (!s.is_object()) detail::parse_fail(where, "expected an object");
    if (s.contains("methods")) detail::parse_fail(where, "per-scenario 'methods' is not supported");
    const std::string name = s.value("name", "scenario" + std::to_string(i + 1));
    const double se1 = detail::json_real(s, "se1", where);
    const double sp1 = detail::json_real(s, "sp1", where);
    const double se2 = detail::json_real(s, "se2", where);
    const double sp2 = detail::json_real(s, "sp2", where);
    const double pi = detail::json_real(s, "pi", where);
    std::optional<double> k;
    if (s.contains("k")) k = detail::json_real(s, "k", where);
    const double e1 = s.contains("eps1") ? detail::json_real(s, "eps1", where) : 0.0;
    const double e0 = s.contains("eps0") ? detail::json_real(s, "eps0", where) : 0.0;
    ScenarioSpec spec = [&] {
      try {
        return ScenarioSpec{name,
                            k ? AccuracyParams::with_dependence_fraction(se1, sp1, se2, sp2, pi, *k)
                              : AccuracyParams::create(se1, sp1, se2, sp2, pi, e1, e0),
                            k, {}, {}};
      } catch (const Error& e) {
        throw Error(e.kind(), where + " ('" + name + "'): " + e.what());
      }
    }();
    if (!s.contains("n")) detail::parse_fail(where, "missing 'n'");
    const json& ns = s.at("n");
    if (ns.is_array()) {
      for (std::size_t k = 0; k < ns.size(); ++k) {
        spec.sizes.push_back(detail::json_size(ns[k], where + ", n[" + std::to_string(k) + "]"));
      }
    } else {
      spec.sizes.push_back(detail::json_size(ns, where + ", field 'n'"));
    }
    spec.targets = s.contains("targets") ? detail::parse_targets(s.at("targets"), where + ", field 'targets'")
                                         : std::vector<Target>{Target::OmegaPos, Target::OmegaNeg};
    cfg.scenarios.push_back(std::move(spec));
  }
  return cfg;
}

inline SimulationConfig load_simulation_config(const std::string& path) {
  const std::string text = detail::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
  return simulation_config_from_json(j);
}

inline constexpr std::string_view kCoverageCsvHeader =
    "scenario,n,target,method,replicates,cp,al,fail,discarded,invalid_count,flagged_count,seed,B,M";

/// Rows in the layout of the coverage tables: CP in percent (2 decimals),
/// AL to 4 decimals or NA when undefined.
inline void write_coverage_csv(std::ostream& os, const CoverageReport& rep) {
  for (const MethodCoverage& m : rep.methods) {
    os << rep.scenario << ',' << rep.n << ',' << to_string(rep.target) << ',' << m.method << ',' << m.replicates
       << ',' << detail::fixed(m.cp, 2) << ',' << (m.al ? detail::fixed(*m.al, 4) : std::string("NA")) << ','
       << (m.fail ? 1 : 0) << ',' << rep.discarded << ',' << m.invalid_count << ',' << m.flagged_count << ','
       << rep.seed << ',' << rep.bootstrap_B << ',' << rep.bayes_M << '\n';
  }
}

inline json to_json(const CoverageReport& rep) {
  json j;
  j["scenario"] = rep.scenario;
  j["n"] = rep.n;
  j["target"] = std::string(to_string(rep.target));
  j["true_omega"] = rep.true_omega;
  j["replicates"] = rep.replicates;
  j["discarded"] = rep.discarded;
  j["seed"] = rep.seed;
  j["B"] = rep.bootstrap_B;
  j["M"] = rep.bayes_M;
  j["methods"] = json::array();
  for (const MethodCoverage& m : rep.methods) {
    j["methods"].push_back({{"method", m.method},
                            {"cp", m.cp},
                            {"al", m.al ? json(*m.al) : json(nullptr)},
                            {"fail", m.fail},
                            {"invalid_count", m.invalid_count},
                            {"flagged_count", m.flagged_count}});
  }
  return j;
}

}  // namespace pairlr
