#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "pairlr/counts.hpp"
#include "pairlr/error.hpp"

namespace pairlr {

/// Which ratio of likelihood ratios is being compared: LR1+/LR2+ or LR1-/LR2-.
enum class Target { OmegaPos, OmegaNeg };

inline std::string_view to_string(Target t) { return t == Target::OmegaPos ? "omega_pos" : "omega_neg"; }

inline Target target_from_string(std::string_view text) {
  if (text == "pos" || text == "omega_pos" || text == "+" || text == "positive") return Target::OmegaPos;
  if (text == "neg" || text == "omega_neg" || text == "-" || text == "negative") return Target::OmegaNeg;
  throw Error(ErrorKind::ParseError, "unknown target '" + std::string(text) + "'");
}

/// Sensitivities, specificities, prevalence and the two conditional
/// dependence factors. Used both for true parameters and for plug-in
/// estimates; estimated dependence factors may be negative.
struct Accuracy {
  double se1 = 0, sp1 = 0, se2 = 0, sp2 = 0;
  std::optional<double> prevalence;
  double eps1 = 0, eps0 = 0;

  double require_prevalence() const {
    if (!prevalence) {
      throw Error(ErrorKind::NotApplicable, "prevalence is not estimable under a case-control design");
    }
    return *prevalence;
  }
};

/// Upper bound of eps1 under the Vacek model.
inline double max_eps1(double se1, double se2) { return std::min(se1 * (1 - se2), se2 * (1 - se1)); }
/// Upper bound of eps0 under the Vacek model.
inline double max_eps0(double sp1, double sp2) { return std::min(sp1 * (1 - sp2), sp2 * (1 - sp1)); }

/// Cell probabilities (p11, p10, p01, p00, q11, q10, q01, q00) of the Vacek
/// conditional-dependence model. Throws InvalidDependence when a cell leaves
/// [0, 1].
inline std::array<double, 8> vacek_cell_probabilities(const Accuracy& a) {
  const double pi = a.require_prevalence();
  const double pibar = 1 - pi;
  std::array<double, 8> c{
      pi * (a.se1 * a.se2 + a.eps1),
      pi * (a.se1 * (1 - a.se2) - a.eps1),
      pi * ((1 - a.se1) * a.se2 - a.eps1),
      pi * ((1 - a.se1) * (1 - a.se2) + a.eps1),
      // T = 1 on a non-diseased subject is the complement of specificity
      pibar * ((1 - a.sp1) * (1 - a.sp2) + a.eps0),
      pibar * ((1 - a.sp1) * a.sp2 - a.eps0),
      pibar * (a.sp1 * (1 - a.sp2) - a.eps0),
      pibar * (a.sp1 * a.sp2 + a.eps0),
  };
  for (std::size_t i = 0; i < c.size(); ++i) {
    // A factor exactly at its bound leaves rounding residue below zero.
    if (c[i] < 0.0 && c[i] > -1e-12) c[i] = 0.0;
    if (!(c[i] >= 0.0 && c[i] <= 1.0)) {
      std::ostringstream os;
      os << "cell " << i << " has probability " << c[i] << " outside [0,1]";
      throw Error(ErrorKind::InvalidDependence, os.str());
    }
  }
  return c;
}

/// Validated generative parameter set.
class AccuracyParams {
 public:
  static AccuracyParams create(double se1, double sp1, double se2, double sp2, double prevalence,
                               double eps1, double eps0) {
    auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_unit(se1) || !in_unit(sp1) || !in_unit(se2) || !in_unit(sp2)) {
      throw Error(ErrorKind::InvalidArgument, "sensitivities and specificities must lie in (0,1)");
    }
    if (!in_unit(prevalence)) throw Error(ErrorKind::InvalidArgument, "prevalence must lie in (0,1)");
    // Small slack so k = 1 and rounded table values are accepted.
    constexpr double slack = 1e-12;
    if (eps1 < 0 || eps1 > max_eps1(se1, se2) + slack) {
      std::ostringstream os;
      os << "eps1 = " << eps1 << " outside [0, " << max_eps1(se1, se2) << "]";
      throw Error(ErrorKind::InvalidDependence, os.str());
    }
    if (eps0 < 0 || eps0 > max_eps0(sp1, sp2) + slack) {
      std::ostringstream os;
      os << "eps0 = " << eps0 << " outside [0, " << max_eps0(sp1, sp2) << "]";
      throw Error(ErrorKind::InvalidDependence, os.str());
    }
    AccuracyParams p;
    p.values_ = Accuracy{se1, sp1, se2, sp2, prevalence, eps1, eps0};
    p.cells_ = vacek_cell_probabilities(p.values_);
    return p;
  }

  /// Dependence factors set to a fraction k of their upper bounds.
  static AccuracyParams with_dependence_fraction(double se1, double sp1, double se2, double sp2,
                                                 double prevalence, double k) {
    if (!(k >= 0.0 && k <= 1.0)) throw Error(ErrorKind::InvalidArgument, "dependence fraction k must lie in [0,1]");
    return create(se1, sp1, se2, sp2, prevalence, k * max_eps1(se1, se2), k * max_eps0(sp1, sp2));
  }

  const Accuracy& values() const noexcept { return values_; }
  const std::array<double, 8>& cells() const noexcept { return cells_; }
  double prevalence() const noexcept { return *values_.prevalence; }

 private:
  AccuracyParams() = default;
  Accuracy values_;
  std::array<double, 8> cells_{};
};

/// Maximum-likelihood estimates of the accuracy parameters.
///
/// The dependence factors use the squared stratum size as divisor, which
/// keeps them on the probability scale of the Vacek model.
template <CountValue Count>
Accuracy estimate_accuracy(const CountTable<Count>& t) {
  const double s = static_cast<double>(t.diseased());
  const double r = static_cast<double>(t.healthy());
  if (!(s > 0) || !(r > 0)) {
    throw Error(ErrorKind::DegenerateTable, s > 0 ? "no non-diseased subjects" : "no diseased subjects");
  }
  auto d = [](Count v) { return static_cast<double>(v); };
  Accuracy a;
  a.se1 = (d(t.s11) + d(t.s10)) / s;
  a.se2 = (d(t.s11) + d(t.s01)) / s;
  a.sp1 = (d(t.r01) + d(t.r00)) / r;
  a.sp2 = (d(t.r10) + d(t.r00)) / r;
  if (t.design == Design::Paired) a.prevalence = s / (s + r);
  a.eps1 = (d(t.s11) * d(t.s00) - d(t.s10) * d(t.s01)) / (s * s);
  a.eps0 = (d(t.r11) * d(t.r00) - d(t.r10) * d(t.r01)) / (r * r);

  auto check = [](double v, const char* name) {
    if (v <= 0.0 || v >= 1.0) {
      std::ostringstream os;
      os << name << " estimate is " << v << "; likelihood ratios are undefined";
      throw Error(ErrorKind::DegenerateTable, os.str());
    }
  };
  check(a.se1, "Se1");
  check(a.sp1, "Sp1");
  check(a.se2, "Se2");
  check(a.sp2, "Sp2");
  return a;
}

/// Effective number of diseased and non-diseased subjects entering the
/// variance formulas: (n*pi, n*(1-pi)) under a paired design, (n1, n2) under
/// case-control.
struct StratumSizes {
  double diseased = 0;
  double healthy = 0;

  static StratumSizes paired(double n, double prevalence) { return {n * prevalence, n * (1 - prevalence)}; }
  static StratumSizes case_control(double n1, double n2) { return {n1, n2}; }
  template <CountValue Count>
  static StratumSizes observed(const CountTable<Count>& t) {
    return {static_cast<double>(t.diseased()), static_cast<double>(t.healthy())};
  }
};

struct SeSpCovariance {
  double var_se1 = 0, var_se2 = 0, var_sp1 = 0, var_sp2 = 0;
  double cov_se = 0, cov_sp = 0;
};

inline SeSpCovariance var_cov_se_sp(const Accuracy& a, const StratumSizes& n) {
  if (!(n.diseased > 0) || !(n.healthy > 0)) throw Error(ErrorKind::InvalidArgument, "stratum sizes must be positive");
  SeSpCovariance v;
  v.var_se1 = a.se1 * (1 - a.se1) / n.diseased;
  v.var_se2 = a.se2 * (1 - a.se2) / n.diseased;
  v.var_sp1 = a.sp1 * (1 - a.sp1) / n.healthy;
  v.var_sp2 = a.sp2 * (1 - a.sp2) / n.healthy;
  v.cov_se = a.eps1 / n.diseased;
  v.cov_sp = a.eps0 / n.healthy;
  return v;
}

struct LrPair {
  double lr1 = 0, lr2 = 0;
  double omega() const { return lr1 / lr2; }
};

inline LrPair lr_point_estimates(const Accuracy& a, Target target) {
  if (target == Target::OmegaPos) return {a.se1 / (1 - a.sp1), a.se2 / (1 - a.sp2)};
  return {(1 - a.se1) / a.sp1, (1 - a.se2) / a.sp2};
}

struct LrCovariance {
  double var_lr1 = 0, var_lr2 = 0, cov_lr12 = 0;
};

/// Delta-method variances of the two likelihood-ratio estimators and their
/// covariance across tests.
inline LrCovariance var_cov_lr(const Accuracy& a, Target target, const StratumSizes& n) {
  const SeSpCovariance v = var_cov_se_sp(a, n);
  LrCovariance c;
  if (target == Target::OmegaPos) {
    const double f1 = 1 - a.sp1, f2 = 1 - a.sp2;
    c.var_lr1 = (a.se1 * a.se1 * v.var_sp1 + f1 * f1 * v.var_se1) / std::pow(f1, 4);
    c.var_lr2 = (a.se2 * a.se2 * v.var_sp2 + f2 * f2 * v.var_se2) / std::pow(f2, 4);
    c.cov_lr12 = (a.se1 * a.se2 * v.cov_sp + f1 * f2 * v.cov_se) / (f1 * f1 * f2 * f2);
  } else {
    const double m1 = 1 - a.se1, m2 = 1 - a.se2;
    c.var_lr1 = (m1 * m1 * v.var_sp1 + a.sp1 * a.sp1 * v.var_se1) / std::pow(a.sp1, 4);
    c.var_lr2 = (m2 * m2 * v.var_sp2 + a.sp2 * a.sp2 * v.var_se2) / std::pow(a.sp2, 4);
    c.cov_lr12 = (m1 * m2 * v.cov_sp + a.sp1 * a.sp2 * v.cov_se) / (a.sp1 * a.sp1 * a.sp2 * a.sp2);
  }
  return c;
}

struct OmegaVariance {
  double var_omega = 0;
  double var_log_omega = 0;
};

inline OmegaVariance var_omega(const Accuracy& a, Target target, const StratumSizes& n) {
  const LrPair lr = lr_point_estimates(a, target);
  if (!(lr.lr1 > 0) || !(lr.lr2 > 0) || !std::isfinite(lr.lr1) || !std::isfinite(lr.lr2)) {
    throw Error(ErrorKind::DegenerateTable, "likelihood ratios must be finite and positive");
  }
  const LrCovariance c = var_cov_lr(a, target, n);
  OmegaVariance out;
  out.var_log_omega = c.var_lr1 / (lr.lr1 * lr.lr1) + c.var_lr2 / (lr.lr2 * lr.lr2) -
                      2 * c.cov_lr12 / (lr.lr1 * lr.lr2);
  const double w = lr.omega();
  out.var_omega = w * w * out.var_log_omega;
  return out;
}

/// Everything the interval constructors need for one sign.
struct LrMoments {
  double lr1 = 0, lr2 = 0, omega = 0;
  double var_lr1 = 0, var_lr2 = 0, cov_lr12 = 0;
  double var_omega = 0, var_log_omega = 0;

  double se_omega() const { return std::sqrt(std::max(var_omega, 0.0)); }
};

inline LrMoments lr_moments(const Accuracy& a, Target target, const StratumSizes& n) {
  const LrPair lr = lr_point_estimates(a, target);
  const LrCovariance c = var_cov_lr(a, target, n);
  const OmegaVariance v = var_omega(a, target, n);
  return LrMoments{lr.lr1, lr.lr2, lr.omega(), c.var_lr1, c.var_lr2, c.cov_lr12, v.var_omega, v.var_log_omega};
}

/// Plug-in estimates for an observed table: accuracy, both signs' moments and
/// the standard errors of the accuracy estimates.
struct LrEstimates {
  Accuracy accuracy;
  StratumSizes sizes;
  SeSpCovariance accuracy_cov;
  LrMoments positive;
  LrMoments negative;
  Design design = Design::Paired;

  const LrMoments& moments(Target t) const { return t == Target::OmegaPos ? positive : negative; }
};

template <CountValue Count>
LrEstimates estimate(const CountTable<Count>& t) {
  LrEstimates e;
  e.accuracy = estimate_accuracy(t);
  e.sizes = StratumSizes::observed(t);
  e.design = t.design;
  e.accuracy_cov = var_cov_se_sp(e.accuracy, e.sizes);
  e.positive = lr_moments(e.accuracy, Target::OmegaPos, e.sizes);
  e.negative = lr_moments(e.accuracy, Target::OmegaNeg, e.sizes);
  return e;
}

}  // namespace pairlr
