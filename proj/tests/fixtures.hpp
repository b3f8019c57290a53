#pragma once

#include <array>

#include "pairlr/pairlr.hpp"

namespace fixtures {

// Exercise test vs resting EKG against arteriography, 1,465 males.
inline constexpr pairlr::PairedCounts kCoronary{224, 591, 32, 176, 35, 80, 41, 286, pairlr::Design::Paired};
// FOBT vs FIT against biopsy, 168 men.
inline constexpr pairlr::PairedCounts kColorectal{68, 1, 18, 13, 4, 2, 1, 61, pairlr::Design::Paired};

// Frozen from an independent 30-digit evaluation of the closed-form
// estimators (mpmath), not from this library.
struct Frozen {
  double se1, sp1, se2, sp2, pi, eps1, eps0;
  double pos_lr1, pos_lr2, pos_var_lr1, pos_var_lr2, pos_cov, pos_omega, pos_var_log;
  double neg_lr1, neg_lr2, neg_var_lr1, neg_var_lr2, neg_cov, neg_omega, neg_var_log;
  std::array<double, 2> pos_reg, pos_log, pos_wald, pos_fieller;
  std::array<double, 2> neg_reg, neg_log, neg_wald, neg_fieller;
};

inline constexpr Frozen kCoronaryFrozen{
    0.79667644183773216, 0.73981900452488688, 0.25024437927663734, 0.82805429864253394, 0.69829351535836177,
    0.019600030195054318, 0.03444851661513892,
    3.0620085851502401, 1.4553686268457066, 0.062656168033691431, 0.029280974675614819, 0.0081918241253141886,
    2.1039402173913043, 0.016830398193904339,
    0.27482878503890638, 0.90544258021783141, 0.00034939335651553485, 0.0006526315995443491,
    6.2933226658286046e-5, 0.30352977763955839, 0.0049160872331804311,
    {1.5890569529418411, 2.7856549950343911}, {1.6315684393905665, 2.713073096713005},
    {1.5689711368420315, 2.6389092979405772}, {1.6470421096804168, 2.7654498871412768},
    {0.26273887149932409, 0.35065358006668903}, {0.26455712680225145, 0.3482435987550788},
    {0.26181795328324281, 0.34524160199587396}, {0.26238445996557034, 0.34594561771278307}};

inline constexpr Frozen kColorectalFrozen{
    0.69, 0.91176470588235294, 0.86, 0.92647058823529412, 0.59523809523809524, 0.0866, 0.052335640138408304,
    7.82, 11.696, 9.5675093333333333, 25.57026304, 10.9834688, 0.6686046511627907, 0.10320188742837883,
    0.34, 0.15111111111111111, 0.0027375483870967742, 0.0014293458749755046, 0.0010719990897195198, 2.25,
    0.044546850998463902,
    {0.21202161226552115, 2.1084274135067182}, {0.35622177817830256, 1.254926584900602},
    {0.24762480556915363, 1.0895844967564278}, {0.27781555276066742, 2.2770751208334513},
    {1.2652013860756763, 4.0013392774588642}, {1.4877393735108209, 3.4028137522860138},
    {1.319236993447114, 3.180763006552886}, {1.5560790049331415, 3.8936785086713473}};

// Header scenario of the first coverage table: omega+ = 2.111, pi = 10%,
// low dependence.
inline pairlr::AccuracyParams table2_header(double pi = 0.10, double eps1 = 0.0225, double eps0 = 0.0400) {
  return pairlr::AccuracyParams::create(0.95, 0.90, 0.90, 0.80, pi, eps1, eps0);
}

}  // namespace fixtures
