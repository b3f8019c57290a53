#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "pairlr/core.hpp"
#include "pairlr/normal.hpp"
#include "pairlr/parallel.hpp"
#include "pairlr/quantile.hpp"
#include "pairlr/random.hpp"

namespace pairlr {

enum class Method { Regression, Logarithmic, Wald, Fieller, Bootstrap, Bayesian };

inline constexpr std::array<Method, 6> kAllMethods{Method::Regression, Method::Logarithmic, Method::Wald,
                                                   Method::Fieller,    Method::Bootstrap,   Method::Bayesian};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Regression: return "regression";
    case Method::Logarithmic: return "logarithmic";
    case Method::Wald: return "wald";
    case Method::Fieller: return "fieller";
    case Method::Bootstrap: return "bootstrap";
    case Method::Bayesian: return "bayesian";
  }
  return "unknown";
}

inline Method method_from_string(std::string_view text) {
  for (Method m : kAllMethods) {
    if (text == to_string(m)) return m;
  }
  if (text == "log") return Method::Logarithmic;
  if (text == "boot") return Method::Bootstrap;
  if (text == "bayes") return Method::Bayesian;
  throw Error(ErrorKind::ParseError, "unknown interval method '" + std::string(text) + "'");
}

inline constexpr bool is_closed_form(Method m) { return m != Method::Bootstrap && m != Method::Bayesian; }

struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;
};

/// Conjugate priors for Se1, Sp1, Se2, Sp2. Default is Beta(1,1) throughout.
struct PriorSet {
  BetaPrior se1, sp1, se2, sp2;
};

struct IntervalRequest {
  PairedCounts counts;
  Target target = Target::OmegaPos;
  double level = 0.95;
  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  std::size_t bootstrap_B = 2000;
  std::size_t bayes_M = 10000;
  PriorSet prior;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const {
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "level must lie in (0,1)");
    if (bootstrap_B < 2) throw Error(ErrorKind::InvalidArgument, "bootstrap B must be at least 2");
    if (bayes_M < 2) throw Error(ErrorKind::InvalidArgument, "Monte Carlo M must be at least 2");
    for (const BetaPrior& p : {prior.se1, prior.sp1, prior.se2, prior.sp2}) {
      if (!(p.alpha > 0) || !(p.beta > 0)) throw Error(ErrorKind::InvalidArgument, "prior hyper-parameters must be positive");
    }
  }
};

struct IntervalResult {
  Method method = Method::Logarithmic;
  Target target = Target::OmegaPos;
  double level = 0.95;
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;
  double point_estimate = std::numeric_limits<double>::quiet_NaN();
  std::string notes;
  /// Set when the interval is for 1/omega (see `invert_interval`).
  bool reciprocal = false;
  /// Mean of the bootstrap or posterior draws, when the method has one.
  std::optional<double> resampled_mean;

  bool has_endpoints() const { return std::isfinite(lower) && std::isfinite(upper); }
  bool contains(double value) const { return has_endpoints() && lower <= value && value <= upper; }
  double length() const { return upper - lower; }
  bool contains_one() const { return contains(1.0); }
};

namespace detail {

inline IntervalResult make_result(Method m, Target t, double level, double point) {
  IntervalResult r;
  r.method = m;
  r.target = t;
  r.level = level;
  r.point_estimate = point;
  return r;
}

/// Estimated variance of ln(omega) under the null hypothesis LR1 = LR2.
inline double null_log_variance(const Accuracy& a, const StratumSizes& n, Target t) {
  const double s = n.diseased, r = n.healthy;
  double v = 0;
  for (auto [se, sp] : {std::pair{a.se1, a.sp1}, std::pair{a.se2, a.sp2}}) {
    if (t == Target::OmegaPos) {
      v += (1 - se) / (s * se) + sp / (r * (1 - sp));
    } else {
      v += se / (s * (1 - se)) + (1 - sp) / (r * sp);
    }
  }
  return v;
}

inline double omega_of(const PairedCounts& t, Target target) {
  return lr_point_estimates(estimate_accuracy(t), target).omega();
}

}  // namespace detail

inline IntervalResult ci_regression(const LrEstimates& est, Target target, double level) {
  const LrMoments& m = est.moments(target);
  const double z = two_sided_z(level);
  const double half = z * std::sqrt(detail::null_log_variance(est.accuracy, est.sizes, target));
  IntervalResult r = detail::make_result(Method::Regression, target, level, m.omega);
  r.lower = m.omega * std::exp(-half);
  r.upper = m.omega * std::exp(half);
  r.valid = r.lower < r.upper;
  return r;
}

inline IntervalResult ci_logarithmic(const LrEstimates& est, Target target, double level) {
  const LrMoments& m = est.moments(target);
  const double z = two_sided_z(level);
  IntervalResult r = detail::make_result(Method::Logarithmic, target, level, m.omega);
  const double half = z * std::sqrt(std::max(m.var_log_omega, 0.0));
  r.lower = m.omega * std::exp(-half);
  r.upper = m.omega * std::exp(half);
  r.valid = r.lower < r.upper;
  if (!r.valid) r.notes = "estimated variance of ln(omega) is zero";
  return r;
}

/// omega_hat +/- z * SE(omega_hat). The lower end is not clamped at zero.
inline IntervalResult ci_wald(const LrEstimates& est, Target target, double level) {
  const LrMoments& m = est.moments(target);
  const double z = two_sided_z(level);
  IntervalResult r = detail::make_result(Method::Wald, target, level, m.omega);
  const double half = z * m.se_omega();
  r.lower = m.omega - half;
  r.upper = m.omega + half;
  r.valid = r.lower > 0 && r.lower < r.upper;
  if (r.lower <= 0) {
    r.notes = "lower limit is not positive";
  } else if (!(r.lower < r.upper)) {
    r.notes = "estimated variance of omega is zero";
  }
  return r;
}

/// Solves (LR1 - w LR2)^2 = z^2 (s11 - 2 w s12 + w^2 s22) for w. Only the
/// bounded case is accepted; otherwise FiellerInvalid is thrown.
inline IntervalResult ci_fieller(const LrEstimates& est, Target target, double level) {
  const LrMoments& m = est.moments(target);
  const double z2 = std::pow(two_sided_z(level), 2);
  const double a = m.lr1 * m.lr2 - m.cov_lr12 * z2;
  const double b = m.lr1 * m.lr1 - m.var_lr1 * z2;
  const double d = m.lr2 * m.lr2 - m.var_lr2 * z2;
  const double disc = a * a - b * d;
  if (!(disc > 0)) {
    std::ostringstream os;
    os << "discriminant " << disc << " is not positive; the confidence set is "
       << (d > 0 ? "empty" : "the whole line");
    throw Error(ErrorKind::FiellerInvalid, os.str());
  }
  if (!(d > 0)) {
    std::ostringstream os;
    os << "LR2^2 - z^2 Var(LR2) = " << d << " is not positive; the confidence set is unbounded";
    throw Error(ErrorKind::FiellerInvalid, os.str());
  }
  const double root = std::sqrt(disc);
  IntervalResult r = detail::make_result(Method::Fieller, target, level, m.omega);
  r.lower = (a - root) / d;
  r.upper = (a + root) / d;
  r.valid = r.lower < r.upper;
  return r;
}

/// Bias-corrected percentile interval from bootstrap replicates of a
/// statistic whose full-sample value is `point`.
inline std::pair<double, double> bias_corrected_interval(std::vector<double> replicates, double point, double level) {
  if (replicates.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two bootstrap replicates");
  const auto below = std::count_if(replicates.begin(), replicates.end(), [&](double v) { return v < point; });
  const auto B = replicates.size();
  if (below == 0 || static_cast<std::size_t>(below) == B) {
    std::ostringstream os;
    os << below << " of " << B << " replicates fall below the estimate; bias correction is infinite";
    throw Error(ErrorKind::BootstrapDegenerate, os.str());
  }
  const double z0 = normal_quantile(static_cast<double>(below) / static_cast<double>(B));
  const double z = two_sided_z(level);
  std::sort(replicates.begin(), replicates.end());
  return {quantile_sorted(replicates, normal_cdf(2 * z0 - z)), quantile_sorted(replicates, normal_cdf(2 * z0 + z))};
}

namespace detail {

inline constexpr std::size_t kBootstrapBlock = 64;
inline constexpr std::size_t kBayesBlock = 256;

inline PairedCounts resample(const PairedCounts& t, Engine& rng) {
  const auto c = t.cells();
  if (t.design == Design::Paired) {
    std::array<double, 8> p{};
    for (std::size_t i = 0; i < 8; ++i) p[i] = static_cast<double>(c[i]);
    return PairedCounts::from_cells(sample_multinomial(t.total(), p, rng), t.design);
  }
  std::array<double, 4> ps{}, pr{};
  for (std::size_t i = 0; i < 4; ++i) {
    ps[i] = static_cast<double>(c[i]);
    pr[i] = static_cast<double>(c[4 + i]);
  }
  const auto s = sample_multinomial(t.diseased(), ps, rng);
  const auto r = sample_multinomial(t.healthy(), pr, rng);
  return PairedCounts{s[0], s[1], s[2], s[3], r[0], r[1], r[2], r[3], t.design};
}

/// B bootstrap replicates of omega. Degenerate resamples are redrawn from
/// the same sub-stream so every replicate is estimable.
inline std::vector<double> bootstrap_replicates(const PairedCounts& t, Target target, std::size_t B,
                                                std::uint64_t seed, unsigned threads) {
  std::vector<double> out(B);
  const std::size_t blocks = (B + kBootstrapBlock - 1) / kBootstrapBlock;
  const std::size_t limit = 100 * B;
  parallel_for(blocks, threads, [&](std::size_t b) {
    Engine rng = make_engine(derive_seed(seed, b));
    const std::size_t end = std::min(B, (b + 1) * kBootstrapBlock);
    for (std::size_t i = b * kBootstrapBlock; i < end; ++i) {
      std::size_t failures = 0;
      for (;;) {
        const PairedCounts x = resample(t, rng);
        if (is_estimable(x)) {
          out[i] = omega_of(x, target);
          break;
        }
        if (++failures > limit) {
          throw Error(ErrorKind::ResampleExhausted, "more than 100*B consecutive degenerate resamples");
        }
      }
    }
  });
  return out;
}

inline std::vector<double> posterior_draws(const PairedCounts& t, Target target, const PriorSet& prior, std::size_t M,
                                           std::uint64_t seed, unsigned threads) {
  auto d = [](std::uint64_t v) { return static_cast<double>(v); };
  const double se1_a = d(t.s11 + t.s10) + prior.se1.alpha, se1_b = d(t.s01 + t.s00) + prior.se1.beta;
  const double sp1_a = d(t.r01 + t.r00) + prior.sp1.alpha, sp1_b = d(t.r11 + t.r10) + prior.sp1.beta;
  const double se2_a = d(t.s11 + t.s01) + prior.se2.alpha, se2_b = d(t.s10 + t.s00) + prior.se2.beta;
  const double sp2_a = d(t.r10 + t.r00) + prior.sp2.alpha, sp2_b = d(t.r11 + t.r01) + prior.sp2.beta;
  std::vector<double> out(M);
  const std::size_t blocks = (M + kBayesBlock - 1) / kBayesBlock;
  parallel_for(blocks, threads, [&](std::size_t b) {
    Engine rng = make_engine(derive_seed(seed, b));
    const std::size_t end = std::min(M, (b + 1) * kBayesBlock);
    for (std::size_t i = b * kBayesBlock; i < end; ++i) {
      Accuracy a;
      a.se1 = sample_beta(se1_a, se1_b, rng);
      a.sp1 = sample_beta(sp1_a, sp1_b, rng);
      a.se2 = sample_beta(se2_a, se2_b, rng);
      a.sp2 = sample_beta(sp2_a, sp2_b, rng);
      out[i] = lr_point_estimates(a, target).omega();
    }
  });
  return out;
}

}  // namespace detail

inline IntervalResult ci_bootstrap(const PairedCounts& counts, Target target, double level, std::size_t B,
                                   std::uint64_t seed, unsigned threads = 1) {
  if (B < 2) throw Error(ErrorKind::InvalidArgument, "bootstrap B must be at least 2");
  const double point = detail::omega_of(counts, target);
  std::vector<double> reps = detail::bootstrap_replicates(counts, target, B, seed, threads);
  IntervalResult r = detail::make_result(Method::Bootstrap, target, level, point);
  r.resampled_mean = std::accumulate(reps.begin(), reps.end(), 0.0) / static_cast<double>(B);
  std::tie(r.lower, r.upper) = bias_corrected_interval(std::move(reps), point, level);
  r.valid = r.lower < r.upper;
  if (!r.valid) r.notes = "bootstrap quantiles coincide";
  return r;
}

inline IntervalResult ci_bayesian(const PairedCounts& counts, Target target, double level, std::size_t M,
                                  const PriorSet& prior, std::uint64_t seed, unsigned threads = 1) {
  if (M < 2) throw Error(ErrorKind::InvalidArgument, "Monte Carlo M must be at least 2");
  const double point = is_estimable(counts) ? detail::omega_of(counts, target) : std::numeric_limits<double>::quiet_NaN();
  std::vector<double> draws = detail::posterior_draws(counts, target, prior, M, seed, threads);
  IntervalResult r = detail::make_result(Method::Bayesian, target, level, point);
  r.resampled_mean = std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(M);
  std::sort(draws.begin(), draws.end());
  const double alpha = 1 - level;
  r.lower = quantile_sorted(draws, alpha / 2);
  r.upper = quantile_sorted(draws, 1 - alpha / 2);
  r.valid = r.lower < r.upper;
  return r;
}

// Request-level entry points.

inline IntervalResult ci_regression(const IntervalRequest& req) {
  req.validate();
  return ci_regression(estimate(req.counts), req.target, req.level);
}
inline IntervalResult ci_logarithmic(const IntervalRequest& req) {
  req.validate();
  return ci_logarithmic(estimate(req.counts), req.target, req.level);
}
inline IntervalResult ci_wald(const IntervalRequest& req) {
  req.validate();
  return ci_wald(estimate(req.counts), req.target, req.level);
}
inline IntervalResult ci_fieller(const IntervalRequest& req) {
  req.validate();
  return ci_fieller(estimate(req.counts), req.target, req.level);
}
inline IntervalResult ci_bootstrap(const IntervalRequest& req) {
  req.validate();
  return ci_bootstrap(req.counts, req.target, req.level, req.bootstrap_B, derive_seed(req.seed, 0xB007), req.threads);
}
inline IntervalResult ci_bayesian(const IntervalRequest& req) {
  req.validate();
  return ci_bayesian(req.counts, req.target, req.level, req.bayes_M, req.prior, derive_seed(req.seed, 0xBA7E), req.threads);
}

/// Interval for 1/omega from an interval for omega. Wald limits are divided
/// by omega_hat^2; every other method takes reciprocals of the limits.
inline IntervalResult invert_interval(const IntervalResult& res, double omega_hat) {
  if (!res.valid) throw Error(ErrorKind::InvalidArgument, "cannot invert an invalid interval");
  if (!(omega_hat > 0)) throw Error(ErrorKind::InvalidArgument, "omega_hat must be positive");
  IntervalResult out = res;
  out.reciprocal = !res.reciprocal;
  out.point_estimate = 1.0 / omega_hat;
  if (res.resampled_mean) out.resampled_mean = 1.0 / *res.resampled_mean;
  if (res.method == Method::Wald) {
    out.lower = res.lower / (omega_hat * omega_hat);
    out.upper = res.upper / (omega_hat * omega_hat);
  } else {
    out.lower = 1.0 / res.upper;
    out.upper = 1.0 / res.lower;
  }
  return out;
}

/// Runs one method and converts library errors into an invalid result whose
/// notes carry the diagnostic.
inline IntervalResult try_interval(const IntervalRequest& req, Method m) {
  try {
    switch (m) {
      case Method::Regression: return ci_regression(req);
      case Method::Logarithmic: return ci_logarithmic(req);
      case Method::Wald: return ci_wald(req);
      case Method::Fieller: return ci_fieller(req);
      case Method::Bootstrap: return ci_bootstrap(req);
      case Method::Bayesian: return ci_bayesian(req);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw;
    IntervalResult r = detail::make_result(m, req.target, req.level,
                                           is_estimable(req.counts) ? detail::omega_of(req.counts, req.target)
                                                                    : std::numeric_limits<double>::quiet_NaN());
    r.notes = e.what();
    return r;
  }
  return {};
}

inline std::vector<IntervalResult> compute_intervals(const IntervalRequest& req) {
  req.validate();
  std::vector<IntervalResult> out;
  out.reserve(req.methods.size());
  for (Method m : req.methods) out.push_back(try_interval(req, m));
  return out;
}

}  // namespace pairlr
