#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pairlr/core.hpp"
#include "pairlr/intervals.hpp"
#include "pairlr/parallel.hpp"
#include "pairlr/random.hpp"

namespace pairlr {

/// One cell of a coverage experiment: true parameters, sample size and the
/// ratio being estimated. The true omega is always recomputed from `params`.
struct Scenario {
  std::string name;
  AccuracyParams params;
  std::uint64_t n = 0;
  Target target = Target::OmegaPos;
  std::optional<double> k_dependence;

  double true_omega() const { return lr_point_estimates(params.values(), target).omega(); }
};

inline PairedCounts sample_table(const AccuracyParams& params, std::uint64_t n, Engine& rng) {
  return PairedCounts::from_cells(sample_multinomial(n, params.cells(), rng), Design::Paired);
}

/// Failure rule for a nominal 95% interval: coverage at or below 93%.
inline bool classify_failure(double cp) { return cp <= 93.0; }

/// Named interval constructor evaluated on each simulated table. `seed` is
/// the replicate's own stream for stochastic methods.
struct IntervalProcedure {
  std::string name;
  std::function<IntervalResult(const PairedCounts&, Target, double level, std::uint64_t seed)> run;
};

struct StudyOptions {
  std::size_t replicates = 10000;
  double level = 0.95;
  std::size_t bootstrap_B = 2000;
  std::size_t bayes_M = 10000;
  PriorSet prior;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

/// Wraps one of the six interval methods for the harness. Library errors
/// (Fieller condition, infinite bias correction) become invalid results.
inline IntervalProcedure standard_procedure(Method m, const StudyOptions& opt) {
  return IntervalProcedure{
      std::string(to_string(m)),
      [m, B = opt.bootstrap_B, M = opt.bayes_M, prior = opt.prior](const PairedCounts& t, Target target, double level,
                                                                   std::uint64_t seed) {
        IntervalRequest req;
        req.counts = t;
        req.target = target;
        req.level = level;
        req.bootstrap_B = B;
        req.bayes_M = M;
        req.prior = prior;
        req.seed = seed;
        req.threads = 1;
        return try_interval(req, m);
      }};
}

/// Control procedure returning (0, +inf) on every table.
inline IntervalProcedure always_cover_procedure() {
  return IntervalProcedure{"always_cover", [](const PairedCounts& t, Target target, double level, std::uint64_t) {
                             IntervalResult r;
                             r.method = Method::Logarithmic;
                             r.target = target;
                             r.level = level;
                             r.lower = 0.0;
                             r.upper = std::numeric_limits<double>::infinity();
                             r.valid = true;
                             r.point_estimate = lr_point_estimates(estimate_accuracy(t), target).omega();
                             r.notes = "control";
                             return r;
                           }};
}

struct MethodCoverage {
  std::string method;
  std::size_t replicates = 0;
  std::size_t covered = 0;
  /// Intervals with two finite limits; only these enter the average length.
  std::size_t scored = 0;
  /// Intervals without finite limits; counted as non-covering.
  std::size_t invalid_count = 0;
  /// Intervals with finite limits but flagged invalid (e.g. Wald lower <= 0).
  std::size_t flagged_count = 0;
  double cp = 0;
  /// Average length; empty when undefined (no scored interval, or infinite).
  std::optional<double> al;
  bool fail = false;
};

struct CoverageReport {
  std::string scenario;
  std::uint64_t n = 0;
  Target target = Target::OmegaPos;
  double true_omega = 0;
  std::size_t replicates = 0;
  std::size_t discarded = 0;
  std::uint64_t seed = 0;
  std::size_t bootstrap_B = 0;
  std::size_t bayes_M = 0;
  std::vector<MethodCoverage> methods;

  const MethodCoverage* find(std::string_view method) const {
    for (const auto& m : methods) {
      if (m.method == method) return &m;
    }
    return nullptr;
  }
};

namespace detail {

/// FNV-1a; a stable per-procedure stream label.
constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Outcome {
  bool scored = false;
  bool covered = false;
  bool flagged = false;
  double length = 0;
};

inline constexpr std::size_t kMaxConsecutiveDiscards = 1'000'000;

}  // namespace detail

/// Draws exactly `opt.replicates` estimable tables (degenerate draws are
/// discarded and regenerated) and scores every procedure on each of them.
///
/// Replicate i uses the stream derive_seed(seed, i), so results do not
/// depend on the worker count or on the order in which replicates run.
inline CoverageReport run_coverage_study(const Scenario& sc, std::span<const IntervalProcedure> procedures,
                                         const StudyOptions& opt) {
  if (opt.replicates < 1) throw Error(ErrorKind::InvalidArgument, "replicates must be at least 1");
  if (sc.n < 1) throw Error(ErrorKind::InvalidArgument, "sample size must be at least 1");
  const std::size_t N = opt.replicates;
  const std::size_t P = procedures.size();
  const double truth = sc.true_omega();

  std::vector<std::size_t> discards(N, 0);
  std::vector<detail::Outcome> outcomes(N * P);

  parallel_for(N, opt.threads, [&](std::size_t i) {
    const std::uint64_t rep_seed = derive_seed(opt.seed, i);
    Engine rng = make_engine(rep_seed);
    PairedCounts table;
    for (;;) {
      table = sample_table(sc.params, sc.n, rng);
      if (is_estimable(table)) break;
      if (++discards[i] > detail::kMaxConsecutiveDiscards) {
        throw Error(ErrorKind::DegenerateTable, "scenario '" + sc.name + "' almost never yields an estimable table");
      }
    }
    for (std::size_t j = 0; j < P; ++j) {
      const IntervalResult r =
          procedures[j].run(table, sc.target, opt.level, derive_seed(rep_seed, detail::fnv1a(procedures[j].name)));
      detail::Outcome& o = outcomes[i * P + j];
      if (r.has_endpoints() || (std::isfinite(r.lower) && r.upper == std::numeric_limits<double>::infinity())) {
        o.scored = true;
        o.covered = r.lower <= truth && truth <= r.upper;
        o.flagged = !r.valid;
        o.length = r.upper - r.lower;
      }
    }
  });

  CoverageReport rep;
  rep.scenario = sc.name;
  rep.n = sc.n;
  rep.target = sc.target;
  rep.true_omega = truth;
  rep.replicates = N;
  rep.seed = opt.seed;
  rep.bootstrap_B = opt.bootstrap_B;
  rep.bayes_M = opt.bayes_M;
  for (std::size_t d : discards) rep.discarded += d;
  for (std::size_t j = 0; j < P; ++j) {
    MethodCoverage mc;
    mc.method = procedures[j].name;
    mc.replicates = N;
    double length_sum = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const detail::Outcome& o = outcomes[i * P + j];
      if (!o.scored) {
        ++mc.invalid_count;
        continue;
      }
      ++mc.scored;
      mc.covered += o.covered ? 1 : 0;
      mc.flagged_count += o.flagged ? 1 : 0;
      length_sum += o.length;
    }
    mc.cp = 100.0 * static_cast<double>(mc.covered) / static_cast<double>(N);
    if (mc.scored > 0 && std::isfinite(length_sum)) mc.al = length_sum / static_cast<double>(mc.scored);
    mc.fail = classify_failure(mc.cp);
    rep.methods.push_back(std::move(mc));
  }
  return rep;
}

inline CoverageReport run_coverage_study(const Scenario& sc, std::span<const Method> methods, const StudyOptions& opt) {
  std::vector<IntervalProcedure> procs;
  procs.reserve(methods.size());
  for (Method m : methods) procs.push_back(standard_procedure(m, opt));
  return run_coverage_study(sc, std::span<const IntervalProcedure>(procs), opt);
}

struct RankedMethod {
  std::string method;
  std::size_t failures = 0;
  std::optional<double> mean_al;
  double mean_cp = 0;

  double cp_distance() const { return std::abs(mean_cp - 95.0); }
};

/// Orders methods across a family of scenarios: fewest failures first, then
/// smallest mean average length, then mean coverage closest to 95%.
inline std::vector<RankedMethod> select_best(std::span<const CoverageReport> reports) {
  if (reports.empty()) throw Error(ErrorKind::InvalidArgument, "select_best needs at least one report");
  std::vector<RankedMethod> ranked;
  std::vector<std::size_t> al_counts;
  for (const CoverageReport& rep : reports) {
    for (const MethodCoverage& mc : rep.methods) {
      auto it = std::find_if(ranked.begin(), ranked.end(), [&](const RankedMethod& r) { return r.method == mc.method; });
      if (it == ranked.end()) {
        ranked.push_back(RankedMethod{mc.method, 0, 0.0, 0.0});
        al_counts.push_back(0);
        it = ranked.end() - 1;
      }
      const auto idx = static_cast<std::size_t>(it - ranked.begin());
      it->failures += mc.fail ? 1 : 0;
      it->mean_cp += mc.cp;
      if (mc.al && it->mean_al) {
        *it->mean_al += *mc.al;
        ++al_counts[idx];
      } else {
        it->mean_al.reset();
      }
    }
  }
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    std::size_t appearances = 0;
    for (const CoverageReport& rep : reports) appearances += rep.find(ranked[i].method) ? 1 : 0;
    ranked[i].mean_cp /= static_cast<double>(appearances);
    if (ranked[i].mean_al) *ranked[i].mean_al /= static_cast<double>(al_counts[i]);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedMethod& a, const RankedMethod& b) {
    if (a.failures != b.failures) return a.failures < b.failures;
    if (a.mean_al.has_value() != b.mean_al.has_value()) return a.mean_al.has_value();
    if (a.mean_al && *a.mean_al != *b.mean_al) return *a.mean_al < *b.mean_al;
    return a.cp_distance() < b.cp_distance();
  });
  return ranked;
}

}  // namespace pairlr
