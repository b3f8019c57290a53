#pragma once

#include <boost/math/distributions/normal.hpp>

#include "pairlr/error.hpp"

namespace pairlr {

inline double normal_cdf(double x) {
  return boost::math::cdf(boost::math::normal_distribution<double>(), x);
}

/// Inverse of the standard normal CDF on the open interval (0, 1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "normal quantile requires p in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

/// z_{1-alpha/2} for a two-sided interval at confidence `level`.
inline double two_sided_z(double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "confidence level must lie in (0,1)");
  return normal_quantile(0.5 + level / 2.0);
}

}  // namespace pairlr
