// pairlr: compare the likelihood ratios of two binary tests on paired data.
//
//   pairlr estimate   --input data/coronary.json
//   pairlr simulate   --scenarios grid.json --replicates 2000
//   pairlr samplesize --input data/coronary.json --target pos --delta 0.1
//
// Exit codes: 0 ok, 2 input error, 3 statistical degeneracy, 4 not converged.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pairlr/pairlr.hpp"

namespace {

using namespace pairlr;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitNotConverged = 4;

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidDependence:
    case ErrorKind::InvalidPrecision:
    case ErrorKind::NotApplicable:
      return kExitInput;
    case ErrorKind::NotConverged:
      return kExitNotConverged;
    default:
      return kExitDegenerate;
  }
}

std::vector<Target> parse_target_list(const std::string& text) {
  if (text == "both") return {Target::OmegaPos, Target::OmegaNeg};
  return {target_from_string(text)};
}

std::vector<Method> parse_method_list(const std::string& text) {
  return detail::parse_methods(json(text), "--methods");
}

/// Writes to --output when given, else stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
    }
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  bool is_stdout() const { return !file_.is_open(); }

 private:
  std::ofstream file_;
};

struct Common {
  std::string format = "table";
  std::string output;
  double level = 0.95;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, bool announce) {
  if (seed) return *seed;
  const std::uint64_t s = generate_seed();
  if (announce) std::cerr << "seed = " << s << " (generated; pass --seed " << s << " to reproduce)\n";
  return s;
}

// ---- estimate ---------------------------------------------------------------

struct EstimateArgs {
  Common common;
  std::string input;
  std::string design;
  std::string target = "both";
  std::string methods = "all";
  std::size_t B = 2000;
  std::size_t M = 10000;
};

int cmd_estimate(const EstimateArgs& a) {
  std::optional<Design> design;
  if (!a.design.empty()) design = design_from_string(a.design);
  IntervalRequest req;
  req.counts = load_counts(a.input, design);
  req.level = a.common.level;
  req.methods = parse_method_list(a.methods);
  req.bootstrap_B = a.B;
  req.bayes_M = a.M;
  req.threads = a.common.threads;
  bool stochastic = false;
  for (Method m : req.methods) stochastic = stochastic || !is_closed_form(m);
  req.seed = stochastic ? resolve_seed(a.common.seed, true) : a.common.seed.value_or(0);
  req.validate();

  const EstimateReport rep = make_estimate_report(req, parse_target_list(a.target));
  Sink sink(a.common.output);
  if (a.common.format == "json") {
    sink.out() << to_json(rep).dump(2) << '\n';
  } else if (a.common.format == "csv") {
    sink.out() << "method,target,level,lower,upper,valid,point_estimate,notes\n";
    for (const auto& block : rep.intervals) {
      for (const IntervalResult& r : block) {
        std::string notes = r.notes;
        for (char& ch : notes) {
          if (ch == ',' || ch == '\n') ch = ';';
        }
        sink.out() << to_string(r.method) << ',' << to_string(r.target) << ',' << r.level << ','
                   << detail::fixed(r.lower, 6) << ',' << detail::fixed(r.upper, 6) << ',' << (r.valid ? 1 : 0)
                   << ',' << detail::fixed(r.point_estimate, 6) << ',' << notes << '\n';
      }
    }
  } else {
    sink.out() << render_table(rep);
  }
  return kExitOk;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::string scenarios;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> B;
  std::optional<std::size_t> M;
  std::string methods;
};

void print_selection(std::ostream& os, const std::vector<CoverageReport>& reports) {
  for (Target t : {Target::OmegaPos, Target::OmegaNeg}) {
    std::vector<CoverageReport> family;
    for (const auto& r : reports) {
      if (r.target == t) family.push_back(r);
    }
    if (family.empty()) continue;
    os << "# " << to_string(t) << " over " << family.size() << " scenario(s), failure = CP <= 93%:";
    for (const RankedMethod& m : select_best(family)) {
      os << ' ' << m.method << " (fails " << m.failures << ", AL "
         << (m.mean_al ? detail::fixed(*m.mean_al, 3) : std::string("NA")) << ", CP " << detail::fixed(m.mean_cp, 2)
         << ')';
    }
    os << '\n';
  }
}

int cmd_simulate(const SimulateArgs& a) {
  SimulationConfig cfg = load_simulation_config(a.scenarios);
  if (a.replicates) cfg.options.replicates = *a.replicates;
  if (a.B) cfg.options.bootstrap_B = *a.B;
  if (a.M) cfg.options.bayes_M = *a.M;
  if (!a.methods.empty()) cfg.methods = parse_method_list(a.methods);
  if (a.common.threads != 0) cfg.options.threads = a.common.threads;
  if (a.common.level != 0.95) cfg.options.level = a.common.level;
  const std::uint64_t master = resolve_seed(a.common.seed ? a.common.seed : cfg.seed, true);

  std::vector<Scenario> cells = cfg.expand();
  std::vector<CoverageReport> reports;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    StudyOptions opt = cfg.options;
    opt.seed = derive_seed(master, i);
    try {
      reports.push_back(run_coverage_study(cells[i], std::span<const Method>(cfg.methods), opt));
    } catch (const Error& e) {
      throw Error(e.kind(), "scenario '" + cells[i].name + "', n = " + std::to_string(cells[i].n) + ": " + e.what());
    }
  }

  Sink sink(a.common.output);
  std::ostream& os = sink.out();
  if (a.common.format == "json") {
    json j;
    j["seed"] = master;
    j["reports"] = json::array();
    for (const auto& r : reports) j["reports"].push_back(to_json(r));
    os << j.dump(2) << '\n';
  } else {
    os << kCoverageCsvHeader << '\n';
    for (const auto& r : reports) write_coverage_csv(os, r);
  }
  if (!reports.empty()) print_selection(a.common.format == "table" ? os : std::cerr, reports);
  return kExitOk;
}

// ---- samplesize -------------------------------------------------------------

struct SampleSizeArgs {
  Common common;
  std::string input;
  std::string target = "pos";
  std::optional<double> delta;
  std::string method = "wald";
  std::string scale = "auto";
  std::optional<double> se1, sp1, se2, sp2, pi, eps1, eps0, k;
  std::optional<std::size_t> robustness;
};

int cmd_samplesize(const SampleSizeArgs& a) {
  if (!a.delta) throw Error(ErrorKind::InvalidArgument, "--delta is required");
  const PrecisionScale scale = precision_scale_from_string(a.scale);
  const Method method = method_from_string(a.method);
  const std::vector<Target> targets = parse_target_list(a.target);
  const bool explicit_params = a.se1 || a.sp1 || a.se2 || a.sp2 || a.pi;
  if (explicit_params == !a.input.empty()) {
    throw Error(ErrorKind::InvalidArgument, "give either --input (pilot sample) or --se1/--sp1/--se2/--sp2/--pi");
  }

  Sink sink(a.common.output);
  std::ostream& os = sink.out();
  json out = json::array();
  int code = kExitOk;

  if (!a.input.empty()) {
    if (method != Method::Wald) {
      throw Error(ErrorKind::InvalidArgument, "the pilot procedure uses the Wald interval; drop --method");
    }
    const PairedCounts pilot = load_counts(a.input);
    for (Target t : targets) {
      const IterationResult it = iterative_procedure(pilot, t, *a.delta, a.common.level, scale);
      const IterationRound& r0 = it.history.front();
      json j{{"target", std::string(to_string(t))},
             {"n0", r0.n0},
             {"omega", r0.omega},
             {"precision", r0.precision},
             {"delta", *a.delta},
             {"achieved", it.achieved},
             {"n", it.n_final}};
      if (!it.achieved) {
        SampleSizeRequest req;
        req.acc = estimate(pilot).accuracy;
        req.target = t;
        req.delta = *a.delta;
        req.level = a.common.level;
        req.scale = scale;
        const SampleSizeResult sr = sample_size_wald(req);
        j["bracket"] = sr.bracket;
        j["delta_effective"] = sr.delta_effective;
        j["add"] = it.n_final - r0.n0;
        j["notes"] = sr.notes;
      } else {
        j["notes"] = "precision already achieved";
      }
      j["sentence"] = describe_iteration(it, t, *a.delta, scale);
      if (a.common.format == "json") out.push_back(j);
      else os << j["sentence"].get<std::string>() << '\n';
    }
  } else {
    if (!(a.se1 && a.sp1 && a.se2 && a.sp2 && a.pi)) {
      throw Error(ErrorKind::InvalidArgument, "explicit parameters need all of --se1 --sp1 --se2 --sp2 --pi");
    }
    const AccuracyParams params =
        a.k ? AccuracyParams::with_dependence_fraction(*a.se1, *a.sp1, *a.se2, *a.sp2, *a.pi, *a.k)
            : AccuracyParams::create(*a.se1, *a.sp1, *a.se2, *a.sp2, *a.pi, a.eps1.value_or(0), a.eps0.value_or(0));
    std::optional<std::uint64_t> seed;
    if (a.robustness) seed = resolve_seed(a.common.seed, true);
    for (Target t : targets) {
      SampleSizeRequest req;
      req.acc = params.values();
      req.target = t;
      req.delta = *a.delta;
      req.level = a.common.level;
      req.method = method;
      req.scale = scale;
      const SampleSizeResult sr = compute_sample_size(req);
      json j = to_json(sr);
      j["target"] = std::string(to_string(t));
      j["sentence"] = describe_sample_size(req, sr);
      std::string extra;
      if (a.robustness) {
        if (method != Method::Wald) throw Error(ErrorKind::InvalidArgument, "--robustness uses the Wald formula");
        const RobustnessResult rb =
            robustness_study(params, t, *a.delta, *a.robustness, *seed, a.common.level, scale, a.common.threads);
        j["robustness"] = {{"n_true", rb.n_true},        {"n_bar", rb.n_bar},
                           {"relative_bias", rb.relative_bias}, {"replicates", rb.replicates},
                           {"discarded", rb.discarded},  {"seed", *seed}};
        extra = " Robustness over " + std::to_string(rb.replicates) + " samples: mean re-estimated n = " +
                detail::fixed(rb.n_bar, 1) + ", relative bias = " + detail::fixed(100 * rb.relative_bias, 2) +
                "% (seed " + std::to_string(*seed) + ").";
      }
      if (a.common.format == "json") out.push_back(j);
      else os << j["sentence"].get<std::string>() << extra << '\n';
    }
  }
  if (a.common.format == "json") os << out.dump(2) << '\n';
  return code;
}

void add_common(CLI::App* app, Common& c, bool with_seed) {
  app->add_option("--level", c.level, "Confidence level")->check(CLI::Range(0.0, 1.0));
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"table", "csv", "json"}));
  app->add_option("--output,-o", c.output, "Output file (default stdout)");
  app->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  if (with_seed) app->add_option("--seed", c.seed, "Master seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compare the likelihood ratios of two binary diagnostic tests under a paired design"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Point estimates, standard errors and the six intervals");
  e->add_option("--input,-i", est.input, "Counts file (.json or CSV table)")->required();
  e->add_option("--design", est.design, "paired | case-control (overrides the file)");
  e->add_option("--target", est.target, "pos | neg | both");
  e->add_option("--methods", est.methods, "Comma-separated interval methods, or all");
  e->add_option("--B", est.B, "Bootstrap resamples");
  e->add_option("--M", est.M, "Posterior draws");
  add_common(e, est.common, true);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Coverage and average length over a scenario grid");
  s->add_option("--scenarios", sim.scenarios, "Scenario grid (JSON)")->required();
  s->add_option("--replicates,-N", sim.replicates, "Replicates per scenario");
  s->add_option("--B", sim.B, "Bootstrap resamples");
  s->add_option("--M", sim.M, "Posterior draws");
  s->add_option("--methods", sim.methods, "Comma-separated interval methods, or all");
  add_common(s, sim.common, true);
  sim.common.format = "csv";

  SampleSizeArgs ss;
  auto* z = app.add_subcommand("samplesize", "Sample size for a fixed interval precision");
  z->add_option("--input,-i", ss.input, "Pilot sample counts file");
  z->add_option("--target", ss.target, "pos | neg | both");
  z->add_option("--delta", ss.delta, "Precision (half-width; multiplicative factor > 1 for logarithmic)");
  z->add_option("--method", ss.method, "wald | logarithmic");
  z->add_option("--scale", ss.scale, "auto | direct | reciprocal: scale on which delta is stated")
      ->check(CLI::IsMember({"auto", "direct", "reciprocal"}));
  z->add_option("--se1", ss.se1, "Sensitivity of test 1");
  z->add_option("--sp1", ss.sp1, "Specificity of test 1");
  z->add_option("--se2", ss.se2, "Sensitivity of test 2");
  z->add_option("--sp2", ss.sp2, "Specificity of test 2");
  z->add_option("--pi", ss.pi, "Prevalence");
  z->add_option("--eps1", ss.eps1, "Dependence among the diseased");
  z->add_option("--eps0", ss.eps0, "Dependence among the non-diseased");
  z->add_option("--k", ss.k, "Dependence as a fraction of its upper bound (overrides eps)");
  z->add_option("--robustness", ss.robustness, "Also run the robustness study with this many samples");
  add_common(z, ss.common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*e) return cmd_estimate(est);
    if (*s) return cmd_simulate(sim);
    if (*z) return cmd_samplesize(ss);
  } catch (const Error& err) {
    std::cerr << "pairlr: " << err.what() << '\n';
    return exit_code_for(err.kind());
  } catch (const std::exception& err) {
    std::cerr << "pairlr: " << err.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}
