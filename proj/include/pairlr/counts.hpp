#pragma once

#include <array>
#include <concepts>
#include <cstdint>
#include <string>
#include <string_view>

#include "pairlr/error.hpp"

namespace pairlr {

/// How the sample was drawn. Under `Paired` a single sample of size n is
/// classified by the gold standard; under `CaseControl` the diseased and
/// non-diseased sizes are fixed by design.
enum class Design { Paired, CaseControl };

inline std::string_view to_string(Design d) {
  return d == Design::Paired ? "paired" : "case-control";
}

inline Design design_from_string(std::string_view text) {
  if (text == "paired") return Design::Paired;
  if (text == "case-control" || text == "case_control" || text == "casecontrol") {
    return Design::CaseControl;
  }
  throw Error(ErrorKind::ParseError, "unknown design '" + std::string(text) + "'");
}

template <typename T>
concept CountValue = std::integral<T> || std::floating_point<T>;

/// The 2x2x2 cross-classification of (D, T1, T2).
///
/// Cell `sij` holds diseased subjects with T1 = i and T2 = j; `rij` the same
/// for non-diseased subjects. `Count` is an unsigned integer for observed
/// data; floating-point tables carry expected counts.
template <CountValue Count>
struct CountTable {
  Count s11{}, s10{}, s01{}, s00{};
  Count r11{}, r10{}, r01{}, r00{};
  Design design = Design::Paired;

  constexpr Count diseased() const { return s11 + s10 + s01 + s00; }
  constexpr Count healthy() const { return r11 + r10 + r01 + r00; }
  constexpr Count total() const { return diseased() + healthy(); }

  /// Cells in (s11, s10, s01, s00, r11, r10, r01, r00) order.
  constexpr std::array<Count, 8> cells() const {
    return {s11, s10, s01, s00, r11, r10, r01, r00};
  }

  static constexpr CountTable from_cells(const std::array<Count, 8>& c,
                                         Design design = Design::Paired) {
    return CountTable{c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7], design};
  }

  friend constexpr bool operator==(const CountTable&, const CountTable&) = default;
};

using PairedCounts = CountTable<std::uint64_t>;
using ExpectedCounts = CountTable<double>;

/// Relabels test 1 as test 2 and vice versa.
template <CountValue Count>
constexpr CountTable<Count> swap_tests(const CountTable<Count>& t) {
  return CountTable<Count>{t.s11, t.s01, t.s10, t.s00, t.r11, t.r01, t.r10, t.r00, t.design};
}

template <CountValue Count>
constexpr CountTable<Count> operator+(const CountTable<Count>& a, const CountTable<Count>& b) {
  auto ca = a.cells();
  const auto cb = b.cells();
  for (std::size_t i = 0; i < ca.size(); ++i) ca[i] += cb[i];
  return CountTable<Count>::from_cells(ca, a.design);
}

/// True when every sensitivity and specificity estimate lies strictly inside
/// (0, 1), so that both likelihood ratios, their variances and the ratio of
/// ratios are finite for either sign.
template <CountValue Count>
constexpr bool is_estimable(const CountTable<Count>& t) {
  const Count s = t.diseased();
  const Count r = t.healthy();
  if (!(s > 0) || !(r > 0)) return false;
  const Count se1 = t.s11 + t.s10;
  const Count se2 = t.s11 + t.s01;
  const Count sp1 = t.r01 + t.r00;
  const Count sp2 = t.r10 + t.r00;
  auto inside = [](Count part, Count whole) { return part > 0 && part < whole; };
  return inside(se1, s) && inside(se2, s) && inside(sp1, r) && inside(sp2, r);
}

}  // namespace pairlr
