#pragma once

// Bundled reference pairs and loading of tableau files from disk.
// The embedded texts are kept identical to data/tableaus/*.rk.

#include "rkx/builders.hpp"
#include "rkx/method.hpp"
#include "rkx/order_conditions.hpp"
#include "rkx/tableau.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

namespace rkx {

inline constexpr std::string_view kBogackiShampine54 = R"RK(# Bogacki-Shampine 5(4) pair, 8 stages, FSAL.
RKPAIR bs5(4) s=8 p=5 phat=4
c: 0 1/6 2/9 3/7 2/3 3/4 1 1
A[2]: 1/6
A[3]: 2/27 4/27
A[4]: 183/1372 -162/343 1053/1372
A[5]: 68/297 -4/11 42/143 1960/3861
A[6]: 597/22528 81/352 63099/585728 58653/366080 4617/20480
A[7]: 174197/959244 -30942/79937 8152137/19744439 666106/1039181 -29421/29068 482048/414219
A[8]: 587/8064 0 4440339/15491840 24353/124800 387/44800 2152/5985 7267/94080
b: 587/8064 0 4440339/15491840 24353/124800 387/44800 2152/5985 7267/94080 0
bhat: 2479/34992 0 123/416 612941/3411720 43/1440 2272/6561 79937/1113912 3293/556956
)RK";

inline constexpr std::string_view kPrinceDormand87 = R"RK(# Prince-Dormand RK8(7)13M. The published rational coefficients satisfy the
# order conditions to about 1e-17, so they are stored as 30-digit decimals
# and verified in tolerance mode.
RKPAIR pd8(7) s=13 p=8 phat=7
c: 0 0.0555555555555555555555555555556 0.0833333333333333333333333333333 0.125 0.3125 0.375 0.1475 0.465 0.564865451382259575398358501426 0.65 0.924656277640504444413402235152 1 1
A[2]: 0.0555555555555555555555555555556
A[3]: 0.0208333333333333333333333333333 0.0625
A[4]: 0.03125 0 0.09375
A[5]: 0.3125 0 -1.171875 1.171875
A[6]: 0.0375 0 0 0.1875 0.15
A[7]: 0.0479101371111111103879244089548 0 0 0.112248712777777776975575909878 -0.0255056737777777777777777777778 0.0128468238888888888888888888889
A[8]: 0.0169179897872922806749526827290 0 0 0.387848278486043169559389352298 0.0359773698515003281804181954472 0.196970214215666059778803651695 -0.172713852340501837926401290174
A[9]: 0.0690957533591923011118357988839 0 0 -0.634247976728854150797932516219 -0.161197575224604079894053091891 0.138650309458825254283192540591 0.940928614035756268227813411057 0.211636326481943981406132038347
A[10]: 0.183556996839045385246252414481 0 0 -2.46876808431559244921064724511 -0.291286887816300455520575915405 -0.0264730202331173757661566992079 2.84783876419280044328113261675 0.281387331469849791811429835170 0.123744899863314657062618143525
A[11]: -1.21542481739588805745534897495 0 0 16.6726086659457723990818623400 0.915741828416817957947323211563 -6.05660580435747093726112556383 -16.0035735941561780837937613172 14.8493030862976625183158269105 -13.3715757352898492874183848061 5.13418264817963792457857242167
A[12]: 0.258860916438264282030529709249 0 0 -4.77448578548920510230152001880 -0.435093013777032508698754069926 -3.04948333207224150558441495234 5.57792003993609910385994994458 6.15583158986104009363323234254 -5.06210458673693836016713669183 2.19392617318067905851365981654 0.134627998659334941434280627482
A[13]: 0.822427599626507476048256762859 0 0 -11.6586732572776642646098685907 -0.757622116690936194364651669307 0.713973588159581526784277545014 12.0757749868900567253798261021 -2.12765911392040265103153459561 1.99016620704895541349598459024 -0.234286471544040292272732861848 0.175898577707942264813056177202 0
b: 0.0417474911415302460416843130208 0 0 0 0 -0.0554523286112393093996872957650 0.239312807201180096034416833044 0.703510669403443020486070607946 -0.759759613814460927827807615666 0.660563030922286339696207260327 0.158187482510123335018691443348 -0.238109538752862803734890219237 0.25
bhat: 0.0295532136763534976180004745103 0 0 0 0 -0.828606276487797038185890843285 0.311240900051118326975558534462 2.46734519059988697782558313159 -2.54694165184190873106247832664 1.44354858367677523711407510773 0.0794155958811272860418047446689 0.0444444444444444444444444444444 0
)RK";

/// Names accepted by load_reference_pair besides file paths.
inline const std::map<std::string, std::string_view>& bundled_pairs() {
  static const std::map<std::string, std::string_view> pairs{
      {"bs5(4)", kBogackiShampine54}, {"bs5", kBogackiShampine54},
      {"pd8(7)", kPrinceDormand87},   {"pd8", kPrinceDormand87}};
  return pairs;
}

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wraps an arbitrary tableau as a reference pair after checking that both
/// weight sets reach their declared orders (exactly for exact tableaus, to
/// `tol` otherwise).
inline EmbeddedMethod make_reference_method(Tableau tab, double tol = kDefaultOrderTolerance) {
  OrderChecker checker(tab);
  auto check = [&](WeightSet w, int want) {
    const int cap = std::min(want + 1, kMaxTreeOrder);
    auto v = checker.verify(w, tol, cap);
    if (want > 0 && v.order < std::min(want, kMaxTreeOrder)) {
      std::ostringstream msg;
      msg << tab.label() << ": " << (w == WeightSet::principal ? "b" : "bhat") << " verifies only to order "
          << v.order << " (declared " << want << ")";
      if (v.first_violation) msg << "; failing " << detail::tree_text(v.first_violation->tree);
      throw LoadError(msg.str());
    }
    return v;
  };
  auto pv = check(WeightSet::principal, tab.order());
  auto ev = check(WeightSet::embedded, tab.embedded_order());
  StageGraph graph = build_stage_graph(tab);
  return EmbeddedMethod{std::move(tab), std::move(graph), Family::reference, std::nullopt, {}, std::move(pv),
                        std::move(ev)};
}

inline EmbeddedMethod load_tableau_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open tableau file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return make_reference_method(parse_tableau(buf.str()));
  } catch (const TableauError& err) {
    throw LoadError(path.string() + ": " + err.what());
  }
}

/// Loads a bundled pair by name ("bs5(4)", "pd8(7)", or the short forms),
/// a file `<tableau_dir>/<name>.rk`, or a path to a tableau file.
inline EmbeddedMethod load_reference_pair(const std::string& name_or_path,
                                         const std::filesystem::path& tableau_dir = {}) {
  const auto& bundled = bundled_pairs();
  if (auto it = bundled.find(name_or_path); it != bundled.end()) return make_reference_method(parse_tableau(it->second));
  if (!tableau_dir.empty()) {
    const auto candidate = tableau_dir / (name_or_path + ".rk");
    if (std::filesystem::exists(candidate)) return load_tableau_file(candidate);
  }
  if (std::filesystem::exists(name_or_path)) return load_tableau_file(name_or_path);
  throw LoadError("unknown reference pair or missing file '" + name_or_path + "'");
}

}  // namespace rkx
