#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pairlr/core.hpp"
#include "pairlr/intervals.hpp"
#include "pairlr/io.hpp"
#include "pairlr/samplesize.hpp"

namespace pairlr {

struct EstimateReport {
  PairedCounts counts;
  LrEstimates estimates;
  double level = 0.95;
  std::vector<Target> targets;
  /// Parallel to `targets`.
  std::vector<std::vector<IntervalResult>> intervals;
  std::uint64_t seed = 0;
  std::size_t bootstrap_B = 0;
  std::size_t bayes_M = 0;
  bool stochastic = false;
};

inline EstimateReport make_estimate_report(const IntervalRequest& base, const std::vector<Target>& targets) {
  EstimateReport rep;
  rep.counts = base.counts;
  rep.estimates = estimate(base.counts);
  rep.level = base.level;
  rep.targets = targets;
  rep.seed = base.seed;
  rep.bootstrap_B = base.bootstrap_B;
  rep.bayes_M = base.bayes_M;
  for (Method m : base.methods) rep.stochastic = rep.stochastic || !is_closed_form(m);
  for (Target t : targets) {
    IntervalRequest req = base;
    req.target = t;
    rep.intervals.push_back(compute_intervals(req));
  }
  return rep;
}

/// Interval preferred for interpretation: logarithmic for omega+ and Wald
/// for omega-, falling back to the first valid interval.
inline const IntervalResult* preferred_interval(const std::vector<IntervalResult>& rs, Target t) {
  const Method want = t == Target::OmegaPos ? Method::Logarithmic : Method::Wald;
  for (const auto& r : rs) {
    if (r.method == want && r.valid && r.has_endpoints()) return &r;
  }
  for (const auto& r : rs) {
    if (r.valid && r.has_endpoints()) return &r;
  }
  return nullptr;
}

namespace detail {

inline std::string pm(double v, double var) { return fixed(v, 3) + " ± " + fixed(std::sqrt(var), 3); }

/// Left-justifies to `width` display columns; UTF-8 continuation bytes take none.
inline std::string column(const std::string& text, std::size_t width) {
  std::size_t shown = 0;
  for (unsigned char ch : text) shown += (ch & 0xC0) != 0x80;
  return text + std::string(width > shown ? width - shown : 1, ' ');
}

inline std::string pair_text(double a, double b) { return "(" + fixed(a, 3) + " , " + fixed(b, 3) + ")"; }

inline std::string method_title(Method m) {
  switch (m) {
    case Method::Regression: return "Regression";
    case Method::Logarithmic: return "Logarithmic";
    case Method::Wald: return "Wald";
    case Method::Fieller: return "Fieller";
    case Method::Bootstrap: return "Bootstrap";
    case Method::Bayesian: return "Bayesian";
  }
  return "?";
}

inline std::string sign_text(Target t) { return t == Target::OmegaPos ? "positive" : "negative"; }
inline std::string omega_text(Target t) { return t == Target::OmegaPos ? "omega+" : "omega-"; }

}  // namespace detail

/// One sentence per target reading the preferred interval against 1.
inline std::string conclusion(const std::vector<IntervalResult>& rs, Target t) {
  const IntervalResult* r = preferred_interval(rs, t);
  const std::string w = detail::omega_text(t);
  const std::string sign = detail::sign_text(t);
  if (r == nullptr) return w + ": no interval could be computed.";
  std::ostringstream os;
  const std::string name = detail::method_title(r->method);
  os << w << ": the " << name << " CI " << detail::pair_text(r->lower, r->upper);
  if (r->contains_one()) {
    os << " contains 1, so the equality of both " << sign << " LRs is not rejected.";
    return os.str();
  }
  const IntervalResult inv = invert_interval(*r, r->point_estimate);
  if (r->lower > 1.0) {
    os << " does not contain 1: the " << sign << " LR of test 1 is between " << detail::fixed(r->lower, 3)
       << " and " << detail::fixed(r->upper, 3) << " times the " << sign << " LR of test 2.";
  } else {
    os << " does not contain 1: the " << sign << " LR of test 2 is between " << detail::fixed(inv.lower, 3)
       << " and " << detail::fixed(inv.upper, 3) << " times the " << sign << " LR of test 1.";
  }
  os << " The " << name << " CI for 1/" << w << " is " << detail::pair_text(inv.lower, inv.upper) << ".";
  return os.str();
}

inline std::string render_table(const EstimateReport& rep) {
  const LrEstimates& e = rep.estimates;
  const Accuracy& a = e.accuracy;
  const SeSpCovariance& v = e.accuracy_cov;
  const LrMoments pos = e.moments(Target::OmegaPos);
  const LrMoments neg = e.moments(Target::OmegaNeg);
  std::ostringstream os;
  const PairedCounts& c = rep.counts;
  os << to_string(c.design) << " design: n = " << c.total() << " (s = " << c.diseased() << ", r = " << c.healthy()
     << ")\n\n";
  os << "          T1=1,T2=1  T1=1,T2=0  T1=0,T2=1  T1=0,T2=0\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "  D = 1  %9llu  %9llu  %9llu  %9llu\n", static_cast<unsigned long long>(c.s11),
                static_cast<unsigned long long>(c.s10), static_cast<unsigned long long>(c.s01),
                static_cast<unsigned long long>(c.s00));
  os << buf;
  std::snprintf(buf, sizeof buf, "  D = 0  %9llu  %9llu  %9llu  %9llu\n\n", static_cast<unsigned long long>(c.r11),
                static_cast<unsigned long long>(c.r10), static_cast<unsigned long long>(c.r01),
                static_cast<unsigned long long>(c.r00));
  os << buf;

  os << "          " << detail::column("Se", 17) << detail::column("Sp", 17) << detail::column("LR+", 17) << "LR-\n";
  os << "  Test 1  " << detail::column(detail::pm(a.se1, v.var_se1), 17) << detail::column(detail::pm(a.sp1, v.var_sp1), 17)
     << detail::column(detail::pm(pos.lr1, pos.var_lr1), 17) << detail::pm(neg.lr1, neg.var_lr1) << '\n';
  os << "  Test 2  " << detail::column(detail::pm(a.se2, v.var_se2), 17) << detail::column(detail::pm(a.sp2, v.var_sp2), 17)
     << detail::column(detail::pm(pos.lr2, pos.var_lr2), 17) << detail::pm(neg.lr2, neg.var_lr2) << "\n\n";
  os << "  pi = " << (a.prevalence ? detail::fixed(*a.prevalence, 3) : std::string("NA"))
     << "   eps1 = " << detail::fixed(a.eps1, 3) << "   eps0 = " << detail::fixed(a.eps0, 3) << '\n';
  os << "  omega+ = LR1+/LR2+ = " << detail::pm(pos.omega, pos.var_omega) << "   omega- = LR1-/LR2- = "
     << detail::pm(neg.omega, neg.var_omega) << "\n";

  const std::string pct = detail::fixed(100 * rep.level, 0);
  for (std::size_t k = 0; k < rep.targets.size(); ++k) {
    const Target t = rep.targets[k];
    os << '\n' << pct << "% CIs for " << (t == Target::OmegaPos ? "omega+ = LR1+/LR2+" : "omega- = LR1-/LR2-") << '\n';
    for (const IntervalResult& r : rep.intervals[k]) {
      std::string limits = r.has_endpoints() ? detail::pair_text(r.lower, r.upper) : std::string("not available");
      std::string flag;
      if (r.has_endpoints()) flag = r.contains_one() ? "contains 1" : "excludes 1";
      if (!r.valid) flag += flag.empty() ? "invalid" : ", invalid";
      std::snprintf(buf, sizeof buf, "  %-12s %-18s %s", detail::method_title(r.method).c_str(), limits.c_str(),
                    flag.c_str());
      os << buf;
      if (!r.notes.empty()) os << "  [" << r.notes << ']';
      os << '\n';
    }
  }
  os << '\n';
  for (std::size_t k = 0; k < rep.targets.size(); ++k) os << conclusion(rep.intervals[k], rep.targets[k]) << '\n';
  if (rep.stochastic) {
    os << "\nseed = " << rep.seed << ", B = " << rep.bootstrap_B << ", M = " << rep.bayes_M << '\n';
  }
  return os.str();
}

inline nlohmann::json to_json(const EstimateReport& rep) {
  using nlohmann::json;
  const LrEstimates& e = rep.estimates;
  const Accuracy& a = e.accuracy;
  const SeSpCovariance& v = e.accuracy_cov;
  json j;
  j["counts"] = to_json(rep.counts);
  j["n"] = rep.counts.total();
  j["level"] = rep.level;
  auto est = [](double x, double var) { return json{{"estimate", x}, {"se", std::sqrt(var)}}; };
  j["accuracy"] = {{"se1", est(a.se1, v.var_se1)}, {"sp1", est(a.sp1, v.var_sp1)},
                   {"se2", est(a.se2, v.var_se2)}, {"sp2", est(a.sp2, v.var_sp2)},
                   {"pi", a.prevalence ? json(*a.prevalence) : json(nullptr)},
                   {"eps1", a.eps1}, {"eps0", a.eps0}};
  for (Target t : {Target::OmegaPos, Target::OmegaNeg}) {
    const LrMoments m = e.moments(t);
    j["ratios"][std::string(to_string(t))] = {{"lr1", est(m.lr1, m.var_lr1)},
                                               {"lr2", est(m.lr2, m.var_lr2)},
                                               {"cov_lr12", m.cov_lr12},
                                               {"omega", est(m.omega, m.var_omega)},
                                               {"var_log_omega", m.var_log_omega}};
  }
  j["intervals"] = json::array();
  j["conclusions"] = json::array();
  for (std::size_t k = 0; k < rep.targets.size(); ++k) {
    for (const IntervalResult& r : rep.intervals[k]) j["intervals"].push_back(to_json(r));
    j["conclusions"].push_back(conclusion(rep.intervals[k], rep.targets[k]));
  }
  if (rep.stochastic) {
    j["seed"] = rep.seed;
    j["B"] = rep.bootstrap_B;
    j["M"] = rep.bayes_M;
  }
  return j;
}

/// Sentence for a size computed from explicit parameters.
inline std::string describe_sample_size(const SampleSizeRequest& req, const SampleSizeResult& r) {
  std::ostringstream os;
  const std::string w = detail::omega_text(req.target);
  const std::string pct = detail::fixed(100 * req.level, 0);
  os << r.n << " individuals are needed to estimate " << w;
  if (req.method == Method::Logarithmic) {
    os << " with the logarithmic CI to within a factor " << detail::fixed(req.delta, 3);
  } else if (uses_reciprocal(req.scale, r.omega)) {
    os << " (1/" << w << ") with a precision equal to " << detail::fixed(r.delta_effective, 3) << " ("
       << detail::fixed(req.delta, 3) << ")";
  } else {
    os << " with a precision equal to " << detail::fixed(req.delta, 3);
  }
  os << " with a confidence of " << pct << "%.";
  return os.str();
}

/// Sentence for the pilot-sample procedure.
inline std::string describe_iteration(const IterationResult& it, Target target, double delta, PrecisionScale scale) {
  std::ostringstream os;
  const IterationRound& first = it.history.front();
  const std::string w = detail::omega_text(target);
  const bool recip = uses_reciprocal(scale, first.omega);
  const std::string ci = recip ? "1/" + w : w;
  os << "With the pilot sample of " << first.n0 << " individuals the Wald CI for " << ci << " has precision "
     << detail::fixed(first.precision, 3);
  if (it.achieved && it.rounds == 0) {
    os << " <= " << detail::fixed(delta, 3) << ": precision already achieved, n = " << first.n0 << '.';
    return os.str();
  }
  os << " > " << detail::fixed(delta, 3) << ". ";
  if (it.awaiting_data) {
    os << it.n_final << " individuals are needed; add " << (it.n_final - first.n0) << " new individuals to the pilot"
       << " sample of " << first.n0 << " and check that the required precision has been achieved.";
  } else if (it.achieved) {
    os << "Precision reached with " << it.n_final << " individuals after " << it.rounds << " augmentation round"
       << (it.rounds == 1 ? "" : "s") << '.';
  } else {
    os << "Precision not reached after " << it.rounds << " augmentation rounds; latest required size "
       << it.n_final << '.';
  }
  return os.str();
}

}  // namespace pairlr
