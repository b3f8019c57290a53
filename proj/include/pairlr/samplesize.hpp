#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pairlr/core.hpp"
#include "pairlr/intervals.hpp"
#include "pairlr/normal.hpp"
#include "pairlr/parallel.hpp"
#include "pairlr/random.hpp"
#include "pairlr/simulation.hpp"

namespace pairlr {

/// Scale on which the precision is stated.
///
/// `Direct`: half-width of the Wald interval for omega itself.
/// `Reciprocal`: half-width for 1/omega, i.e. delta = omega^2 * delta'.
/// `Auto`: `Reciprocal` when omega > 1, otherwise `Direct`.
enum class PrecisionScale { Auto, Direct, Reciprocal };

inline std::string_view to_string(PrecisionScale s) {
  switch (s) {
    case PrecisionScale::Auto: return "auto";
    case PrecisionScale::Direct: return "direct";
    case PrecisionScale::Reciprocal: return "reciprocal";
  }
  return "auto";
}

inline PrecisionScale precision_scale_from_string(std::string_view text) {
  if (text == "auto") return PrecisionScale::Auto;
  if (text == "direct") return PrecisionScale::Direct;
  if (text == "reciprocal") return PrecisionScale::Reciprocal;
  throw Error(ErrorKind::ParseError, "unknown precision scale '" + std::string(text) + "'");
}

inline bool uses_reciprocal(PrecisionScale s, double omega) {
  return s == PrecisionScale::Reciprocal || (s == PrecisionScale::Auto && omega > 1.0);
}

struct SampleSizeRequest {
  Accuracy acc;
  Target target = Target::OmegaPos;
  double delta = 0.1;
  double level = 0.95;
  /// Wald or Logarithmic.
  Method method = Method::Wald;
  PrecisionScale scale = PrecisionScale::Auto;
  std::optional<std::uint64_t> pilot_n;
};

struct SampleSizeResult {
  std::uint64_t n = 0;
  /// Real-valued size before the ceiling.
  double n_exact = 0;
  double bracket = 0;
  /// The precision actually used in the formula (delta on the omega scale for
  /// Wald, the multiplicative half-width for Logarithmic).
  double delta_effective = 0;
  double omega = 0;
  std::string notes;
};

/// n * Var(ln omega_hat) under a paired design: the bracketed factor shared
/// by the Wald and logarithmic sample-size formulas.
inline double sample_size_bracket(const Accuracy& a, Target target) {
  const double pi = a.require_prevalence();
  const double pibar = 1 - pi;
  double sum = 0;
  double dependence = 0;
  if (target == Target::OmegaPos) {
    for (auto [se, sp] : {std::pair{a.se1, a.sp1}, std::pair{a.se2, a.sp2}}) {
      sum += (1 - se) / (pi * se) + sp / (pibar * (1 - sp));
    }
    dependence = 2 * a.eps1 / (pi * a.se1 * a.se2) + 2 * a.eps0 / (pibar * (1 - a.sp1) * (1 - a.sp2));
  } else {
    for (auto [se, sp] : {std::pair{a.se1, a.sp1}, std::pair{a.se2, a.sp2}}) {
      sum += se / (pi * (1 - se)) + (1 - sp) / (pibar * sp);
    }
    dependence = 2 * a.eps1 / (pi * (1 - a.se1) * (1 - a.se2)) + 2 * a.eps0 / (pibar * a.sp1 * a.sp2);
  }
  const double bracket = sum - dependence;
  if (!(bracket > 0)) {
    std::ostringstream os;
    os << "variance bracket " << bracket << " is not positive (dependence terms " << dependence
       << " exceed variance terms " << sum << ")";
    throw Error(ErrorKind::NonPositiveBracket, os.str());
  }
  return bracket;
}

namespace detail {
inline std::uint64_t ceil_size(double n_exact) {
  return n_exact <= 1.0 ? 1 : static_cast<std::uint64_t>(std::ceil(n_exact));
}
}  // namespace detail

inline SampleSizeResult sample_size_wald(const SampleSizeRequest& req) {
  if (!(req.delta > 0)) throw Error(ErrorKind::InvalidPrecision, "precision must be positive");
  SampleSizeResult out;
  out.omega = lr_point_estimates(req.acc, req.target).omega();
  out.bracket = sample_size_bracket(req.acc, req.target);
  const bool recip = uses_reciprocal(req.scale, out.omega);
  out.delta_effective = recip ? out.omega * out.omega * req.delta : req.delta;
  const double z = two_sided_z(req.level);
  out.n_exact = std::pow(z * out.omega / out.delta_effective, 2) * out.bracket;
  out.n = detail::ceil_size(out.n_exact);
  if (recip) out.notes = "precision stated for 1/omega; delta = omega^2 * delta'";
  return out;
}

/// Sizing from the logarithmic interval; `delta` is the multiplicative
/// half-width (> 1), so the interval is omega_hat * delta^(+/-1).
inline SampleSizeResult sample_size_logarithmic(const SampleSizeRequest& req) {
  if (!(req.delta > 1.0)) {
    throw Error(ErrorKind::InvalidPrecision, "logarithmic precision is a multiplicative half-width and must exceed 1");
  }
  SampleSizeResult out;
  out.omega = lr_point_estimates(req.acc, req.target).omega();
  out.bracket = sample_size_bracket(req.acc, req.target);
  out.delta_effective = req.delta;
  const double z = two_sided_z(req.level);
  out.n_exact = std::pow(z / std::log(req.delta), 2) * out.bracket;
  out.n = detail::ceil_size(out.n_exact);
  return out;
}

inline SampleSizeResult compute_sample_size(const SampleSizeRequest& req) {
  switch (req.method) {
    case Method::Wald: return sample_size_wald(req);
    case Method::Logarithmic: return sample_size_logarithmic(req);
    default: throw Error(ErrorKind::InvalidArgument, "sample size is available for the Wald and logarithmic intervals only");
  }
}

/// Half-width of the Wald interval on the stated scale: z * SE(omega_hat),
/// divided by omega_hat^2 when the precision refers to 1/omega.
inline double wald_precision(const LrEstimates& est, Target target, double level, PrecisionScale scale) {
  const LrMoments& m = est.moments(target);
  const double half = two_sided_z(level) * m.se_omega();
  return uses_reciprocal(scale, m.omega) ? half / (m.omega * m.omega) : half;
}

struct IterationRound {
  std::uint64_t n0 = 0;
  double omega = 0;
  double precision = 0;
  /// Size from the formula when the precision was not yet reached.
  std::optional<std::uint64_t> required_n;
};

struct IterationResult {
  bool achieved = false;
  /// Sample size at which precision was reached, or the latest required size.
  std::uint64_t n_final = 0;
  /// Number of times the sample was augmented.
  std::size_t rounds = 0;
  /// True when no augmentation source was supplied and the caller must
  /// collect `n_final - n0` more subjects.
  bool awaiting_data = false;
  std::vector<IterationRound> history;
  std::string notes;
};

/// Supplies `extra` additional subjects for augmentation round `round`.
using Augmenter = std::function<PairedCounts(std::uint64_t extra, std::size_t round)>;

/// Pilot-driven sizing: check the Wald precision on the current sample,
/// size the study from its estimates, augment, and re-check.
inline IterationResult iterative_procedure(const PairedCounts& pilot, Target target, double delta, double level,
                                           PrecisionScale scale = PrecisionScale::Auto, std::size_t max_rounds = 10,
                                           const Augmenter& augment = {}) {
  if (pilot.design != Design::Paired) {
    throw Error(ErrorKind::NotApplicable, "sample-size determination needs a paired pilot sample");
  }
  if (!(delta > 0)) throw Error(ErrorKind::InvalidPrecision, "precision must be positive");
  IterationResult out;
  PairedCounts sample = pilot;
  for (;;) {
    const LrEstimates est = estimate(sample);
    IterationRound round;
    round.n0 = sample.total();
    round.omega = est.moments(target).omega;
    round.precision = wald_precision(est, target, level, scale);
    if (round.precision <= delta) {
      out.history.push_back(round);
      out.achieved = true;
      out.n_final = round.n0;
      return out;
    }
    SampleSizeRequest req;
    req.acc = est.accuracy;
    req.target = target;
    req.delta = delta;
    req.level = level;
    req.scale = scale;
    req.pilot_n = round.n0;
    const SampleSizeResult size = sample_size_wald(req);
    round.required_n = size.n;
    out.history.push_back(round);
    out.n_final = size.n;
    if (!augment) {
      out.awaiting_data = true;
      return out;
    }
    if (out.rounds == max_rounds) {
      std::ostringstream os;
      os << "precision not reached after " << max_rounds << " augmentation rounds";
      out.notes = os.str();
      return out;
    }
    const std::uint64_t extra = size.n > round.n0 ? size.n - round.n0 : 1;
    sample = sample + augment(extra, out.rounds);
    ++out.rounds;
  }
}

/// Augmentation drawn from known parameters (simulation mode).
inline Augmenter augment_from(const AccuracyParams& params, std::uint64_t seed) {
  return [params, seed](std::uint64_t extra, std::size_t round) {
    Engine rng = make_engine(derive_seed(seed, round));
    return sample_table(params, extra, rng);
  };
}

struct RobustnessResult {
  std::uint64_t n_true = 0;
  double n_bar = 0;
  double relative_bias = 0;
  std::size_t replicates = 0;
  std::size_t discarded = 0;
};

/// Sensitivity of the sizing formula to estimation noise: size at the true
/// parameters, re-size from N simulated samples of that size, and report
/// the mean re-estimated size and its relative bias.
inline RobustnessResult robustness_study(const AccuracyParams& params, Target target, double delta, std::size_t N,
                                         std::uint64_t seed, double level = 0.95,
                                         PrecisionScale scale = PrecisionScale::Auto, unsigned threads = 0) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "replicates must be at least 1");
  SampleSizeRequest req;
  req.acc = params.values();
  req.target = target;
  req.delta = delta;
  req.level = level;
  req.scale = scale;
  RobustnessResult out;
  out.n_true = sample_size_wald(req).n;
  out.replicates = N;

  std::vector<double> sizes(N);
  std::vector<std::size_t> discards(N, 0);
  parallel_for(N, threads, [&](std::size_t i) {
    Engine rng = make_engine(derive_seed(seed, i));
    PairedCounts t;
    do {
      t = sample_table(params, out.n_true, rng);
    } while (!is_estimable(t) && ++discards[i] < detail::kMaxConsecutiveDiscards);
    SampleSizeRequest ri = req;
    ri.acc = estimate_accuracy(t);
    sizes[i] = static_cast<double>(sample_size_wald(ri).n);
  });
  out.n_bar = std::accumulate(sizes.begin(), sizes.end(), 0.0) / static_cast<double>(N);
  out.relative_bias = (out.n_bar - static_cast<double>(out.n_true)) / static_cast<double>(out.n_true);
  out.discarded = std::accumulate(discards.begin(), discards.end(), std::size_t{0});
  return out;
}

}  // namespace pairlr
