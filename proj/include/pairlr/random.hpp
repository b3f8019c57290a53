#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>

#include "pairlr/error.hpp"

namespace pairlr {

using Engine = std::mt19937_64;

/// SplitMix64 finaliser; a bijective mix of a 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of sub-stream `index` under `master`. Any (master, path) fully
/// determines the stream, independent of how work is scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t sub) {
  return derive_seed(derive_seed(master, index), sub);
}

inline Engine make_engine(std::uint64_t seed) { return Engine(mix64(seed)); }

/// Fresh seed for runs where the caller supplied none; echo it in output.
inline std::uint64_t generate_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) | rd();
}

/// One multinomial draw by sequential conditional binomials.
template <std::size_t K>
std::array<std::uint64_t, K> sample_multinomial(std::uint64_t n, const std::array<double, K>& probs, Engine& rng) {
  double mass = 0;
  for (double p : probs) {
    if (!(p >= 0)) throw Error(ErrorKind::InvalidArgument, "multinomial probabilities must be non-negative");
    mass += p;
  }
  if (!(mass > 0)) throw Error(ErrorKind::InvalidArgument, "multinomial probabilities sum to zero");
  std::array<std::uint64_t, K> out{};
  std::uint64_t left = n;
  for (std::size_t i = 0; i + 1 < K && left > 0; ++i) {
    double p = mass > 0 ? probs[i] / mass : 0.0;
    if (p >= 1.0) {
      out[i] = left;
      left = 0;
      break;
    }
    if (p > 0) {
      std::binomial_distribution<std::uint64_t> draw(left, p);
      out[i] = draw(rng);
      left -= out[i];
    }
    mass -= probs[i];
  }
  out[K - 1] += left;
  return out;
}

inline double sample_beta(double a, double b, Engine& rng) {
  if (!(a > 0) || !(b > 0)) throw Error(ErrorKind::InvalidArgument, "beta parameters must be positive");
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

}  // namespace pairlr
