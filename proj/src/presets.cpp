#include <algorithm>
#include <cmath>

#include "ccg/dgp.hpp"
#include "ccg/error.hpp"

namespace ccg {

namespace {

using Kind = PeriodMap::Kind;

GroupParams group(std::string label, int first_treated = 0) {
  GroupParams g;
  g.label = std::move(label);
  g.first_treated = first_treated;
  return g;
}

GroupParams did_group(std::string label, Law eta, int first_treated = 0) {
  GroupParams g = group(std::move(label), first_treated);
  g.eta = eta;
  return g;
}

GroupParams ife_group(std::string label, Law eta, Law lambda, int first_treated = 0) {
  GroupParams g = did_group(std::move(label), eta, first_treated);
  g.lambda = {lambda};
  return g;
}

GroupParams cic_group(std::string label, Law u, int first_treated = 0) {
  GroupParams g = group(std::move(label), first_treated);
  g.u = u;
  return g;
}

GroupParams lou_group(std::string label, Law lag, Law pre = Law::normal(0.0, 1.0), int first_treated = 0) {
  GroupParams g = group(std::move(label), first_treated);
  g.lag = lag;
  g.pre = pre;
  return g;
}

GroupParams latent_group(std::string label, Law xi, int first_treated = 0) {
  GroupParams g = group(std::move(label), first_treated);
  g.xi = {xi};
  return g;
}

GroupParams dyn_group(std::string label, Law eta, Law y1, int first_treated = 0) {
  GroupParams g = did_group(std::move(label), eta, first_treated);
  g.y1 = y1;
  return g;
}

DgpSpec base(std::string name, Strategy s, int T, int t_star, double att = 1.0) {
  DgpSpec d;
  d.name = std::move(name);
  d.strategy = s;
  d.T = T;
  d.t_star = t_star;
  d.att = att;
  d.S = std::min(2, t_star - 1);
  d.theta.assign(static_cast<std::size_t>(T), 0.0);
  return d;
}

PeriodMap affine(double a, double b) { return {Kind::affine, a, b, 0.0, 0.0, {}, {}}; }
PeriodMap cubic(double a, double b, double c) { return {Kind::cubic, a, b, c, 0.0, {}, {}}; }
PeriodMap identity() { return {}; }
PeriodMap chi2() { return {Kind::chi2_quantile, 0.0, 1.0, 0.0, 0.0, {}, {}}; }

const double kSqrt2 = std::sqrt(2.0);

// ---- Theorem 1 settings with a distribution-matched group and a far group --

DgpSpec did_matched() {
  DgpSpec d = base("did_matched", Strategy::did, 3, 3, 2.0);
  d.theta = {0.0, 1.0, 2.0};
  d.groups = {did_group("treated", Law::normal(0.0, 1.0), 3), did_group("matched", Law::normal(0.0, 1.0)),
              did_group("far", Law::normal(2.0, 1.0))};
  return d;
}

DgpSpec cic_matched() {
  DgpSpec d = base("cic_matched", Strategy::cic, 3, 3, 2.0);
  d.noise_sd = 0.0;
  d.maps = {identity(), cubic(0.0, 1.0, 0.2), cubic(1.0, 1.0, 0.5)};
  d.groups = {cic_group("treated", Law::normal(0.0, 1.0), 3), cic_group("matched", Law::normal(0.0, 1.0)),
              cic_group("far", Law::normal(1.5, 1.0))};
  return d;
}

DgpSpec lou_matched() {
  DgpSpec d = base("lou_matched", Strategy::lou, 3, 3, 2.0);
  d.transition = {{0.5, 0.8, 0.3}};
  d.groups = {lou_group("treated", Law::normal(1.0, 1.0), Law::normal(0.0, 1.0), 3),
              lou_group("matched", Law::normal(1.0, 1.0)), lou_group("far", Law::normal(-1.0, 1.0))};
  return d;
}

// ---- appendix counterexamples ---------------------------------------------

DgpSpec ife_thm1iv() {
  DgpSpec d = base("ife_thm1iv", Strategy::ife, 2, 2);
  d.counterexample = "ife_thm1iv";
  d.S = 1;
  d.F = {{1.0}, {2.0}};
  d.groups = {ife_group("treated", Law::constant(1.0), Law::constant(0.0), 2),
              ife_group("comparison", Law::constant(0.0), Law::constant(1.0))};
  return d;
}

DgpSpec cic_prop1ii() {
  DgpSpec d = base("cic_prop1ii", Strategy::cic, 2, 2);
  d.counterexample = "cic_prop1ii";
  d.S = 1;
  d.noise_sd = 0.0;
  d.maps = {identity(), chi2()};
  d.groups = {cic_group("treated", Law::triangular(0.0, 1.0, 0.5), 2), cic_group("comparison", Law::uniform(0.0, 1.0))};
  return d;
}

DgpSpec lou_prop1iii() {
  DgpSpec d = base("lou_prop1iii", Strategy::lou, 2, 2);
  d.counterexample = "lou_prop1iii";
  d.S = 1;
  d.transition = {{0.0, 0.0, 1.0}};
  d.groups = {lou_group("treated", Law::normal(0.0, 1.0), Law::normal(0.0, 1.0), 2),
              lou_group("comparison", Law::normal(0.0, kSqrt2))};
  return d;
}

DgpSpec dynpanel_prop2() {
  DgpSpec d = base("dynpanel_prop2", Strategy::dynamic_panel, 3, 3);
  d.counterexample = "dynpanel_prop2";
  d.S = 1;
  d.rho = 0.5;
  d.groups = {dyn_group("treated", Law::normal(1.0, 1.0), Law::normal(0.0, 1.0), 3),
              dyn_group("comparison", Law::normal(0.0, 1.0), Law::normal(2.0, 1.0))};
  return d;
}

DgpSpec cic_prop3ii() {
  DgpSpec d = base("cic_prop3ii", Strategy::cic, 2, 2);
  d.counterexample = "cic_prop3ii";
  d.S = 1;
  d.noise_sd = 0.0;
  const auto [c2, c3] = cic_prop3ii_weights();
  PeriodMap q{Kind::perturbation, 0.0, 1.0, 0.0, 1.0, {1.0, 2.0, 3.0}, {1.0, c2, c3}};
  d.maps = {identity(), q};
  d.groups = {cic_group("treated", Law::normal(1.0, 1.0), 2), cic_group("g2", Law::normal(2.0, 1.0)),
              cic_group("g3", Law::normal(3.0, 1.0))};
  return d;
}

DgpSpec lou_prop3iii() {
  DgpSpec d = base("lou_prop3iii", Strategy::lou, 2, 2);
  d.counterexample = "lou_prop3iii";
  d.rank_deficient = true;
  d.S = 1;
  const double gamma = 0.5, k = 2.0;
  d.transition = {{-gamma * k, 1.0, gamma}};
  d.groups = {lou_group("treated", Law::normal(1.0, kSqrt2), Law::normal(0.0, 1.0), 2),
              lou_group("g2", Law::normal(0.0, kSqrt2)), lou_group("g3", Law::normal(1.0, 1.0)),
              lou_group("g4", Law::normal(-1.0, 1.0))};
  return d;
}

DgpSpec latent_prop3v() {
  DgpSpec d = base("latent_prop3v", Strategy::latent, 2, 2);
  d.counterexample = "latent_prop3v";
  d.S = 1;
  d.theta = {0.0, -1.0};
  d.a = {{1.0}, {2.0}};
  d.b = {0.0, 0.0};
  d.groups = {latent_group("treated", Law::normal(0.0, 1.0), 2), latent_group("comparison", Law::normal(1.0, 1.0))};
  return d;
}

// ---- multiply robust cases -------------------------------------------------

DgpSpec mr_case1() {
  DgpSpec d = base("mr_case1", Strategy::did, 2, 2);
  d.counterexample = "mr_case1";
  d.S = 1;
  d.theta = {0.0, 1.0};
  d.groups = {did_group("treated", Law::normal(0.0, 1.0), 2), did_group("comparison", Law::normal(0.0, 1.0))};
  return d;
}

DgpSpec mr_case2() {
  DgpSpec d = base("mr_case2", Strategy::did, 2, 2);
  d.counterexample = "mr_case2";
  d.S = 1;
  d.groups = {did_group("treated", Law::normal(0.0, 1.0), 2), did_group("comparison", Law::normal(0.5, 1.0))};
  return d;
}

// ---- selection and transfer checks -----------------------------------------

DgpSpec separated() {
  DgpSpec d = base("separated", Strategy::did, 2, 2);
  d.S = 1;
  d.theta = {0.0, 0.5};
  d.groups = {did_group("treated", Law::normal(0.0, 1.0), 2), did_group("close1", Law::normal(0.0, 1.0)),
              did_group("close2", Law::normal(0.0, 1.0)), did_group("far1", Law::normal(1.0, 1.0)),
              did_group("far2", Law::normal(-1.5, 1.0))};
  return d;
}

DgpSpec lou_transfer_fullrank() {
  DgpSpec d = base("lou_transfer_fullrank", Strategy::lou, 2, 2);
  d.S = 1;
  d.n_per_group = 20000;
  d.noise_sd = 0.1;
  d.transition = {{0.0, 1.0, 0.0}};
  d.groups = {lou_group("treated", Law::normal(0.5, 1.0), Law::normal(0.0, 1.0), 2),
              lou_group("g2", Law::normal(0.0, 1.0)), lou_group("g3", Law::normal(1.0, 1.0)),
              lou_group("g4", Law::normal(2.0, std::sqrt(0.5)))};
  return d;
}

DgpSpec cic_dist_th() {
  DgpSpec d = base("cic_dist_th", Strategy::cic, 3, 3);
  d.noise_sd = 0.0;
  d.maps = {affine(1.0, 2.0), cubic(0.0, 1.0, 1.0), cubic(0.0, 1.0, 1.0)};
  d.groups = {cic_group("treated", Law::triangular(0.0, 1.0, 0.3), 3), cic_group("g2", Law::uniform(0.0, 1.0)),
              cic_group("g3", Law::triangular(0.0, 1.0, 0.7))};
  return d;
}

DgpSpec staggered_did() {
  DgpSpec d = base("staggered_did", Strategy::did, 5, 3);
  d.S = 2;
  d.theta = {0.0, 0.5, 1.0, 1.5, 2.0};
  d.groups = {did_group("early", Law::normal(0.0, 1.0), 3), did_group("late", Law::normal(0.0, 1.0), 4),
              did_group("never1", Law::normal(0.0, 1.0)), did_group("never2", Law::normal(0.0, 1.0))};
  return d;
}

// ---- robustness table rows -------------------------------------------------
// Each row carries one comparison group per column: mean1, dist1, meanS, distS.

DgpSpec prop1_did() {
  DgpSpec d = base("prop1_did", Strategy::did, 3, 3);
  d.theta = {0.0, 0.5, 1.0};
  d.groups = {did_group("treated", Law::normal(0.0, 1.0), 3), did_group("mean1", Law::normal(0.0, 1.5)),
              did_group("meanS", Law::normal(0.0, 2.0)), did_group("distS", Law::normal(0.0, 1.0))};
  return d;
}

DgpSpec prop1_cic() {
  DgpSpec d = base("prop1_cic", Strategy::cic, 3, 3);
  d.noise_sd = 0.0;
  d.maps = {affine(1.0, 2.0), identity(), chi2()};
  d.groups = {cic_group("treated", Law::triangular(0.0, 1.0, 0.5), 3), cic_group("mean1", Law::uniform(0.0, 1.0)),
              cic_group("meanS", Law::uniform(0.1, 0.9)), cic_group("distS", Law::triangular(0.0, 1.0, 0.5))};
  return d;
}

DgpSpec prop1_lou() {
  DgpSpec d = base("prop1_lou", Strategy::lou, 3, 3);
  d.transition = {{0.0, 0.0, 1.0}};
  d.groups = {lou_group("treated", Law::normal(0.0, 1.0), Law::normal(0.0, 1.0), 3),
              lou_group("mean1", Law::normal(0.0, kSqrt2)), lou_group("meanS", Law::normal(0.0, std::sqrt(0.5))),
              lou_group("distS", Law::normal(0.0, 1.0))};
  return d;
}

DgpSpec prop1_ife() {
  DgpSpec d = base("prop1_ife", Strategy::ife, 3, 3);
  d.F = {{1.0}, {2.0}, {3.0}};
  d.groups = {ife_group("treated", Law::normal(1.0, 1.0), Law::constant(0.0), 3),
              ife_group("mean1", Law::normal(-1.0, 1.0), Law::constant(1.0)),
              ife_group("meanS", Law::normal(1.0, kSqrt2), Law::normal(0.0, 1.0)),
              ife_group("distS", Law::normal(1.0, 1.0), Law::constant(0.0))};
  return d;
}

DgpSpec prop1_latent() {
  DgpSpec d = base("prop1_latent", Strategy::latent, 3, 3);
  d.a = {{1.0}, {1.0}, {1.0}};
  d.b = {0.0, 0.0, 1.0};
  d.groups = {latent_group("treated", Law::normal(0.0, 1.0), 3), latent_group("mean1", Law::normal(0.0, kSqrt2)),
              latent_group("meanS", Law::normal(0.0, std::sqrt(0.5))), latent_group("distS", Law::normal(0.0, 1.0))};
  return d;
}

DgpSpec prop2_linear_trend() {
  DgpSpec d = base("prop2_linear_trend", Strategy::linear_trend, 3, 3);
  d.groups = {ife_group("treated", Law::normal(1.0, 1.0), Law::constant(0.0), 3),
              ife_group("mean1", Law::normal(-1.0, kSqrt2), Law::constant(1.0)),
              ife_group("dist1", Law::normal(-1.0, 1.0), Law::constant(1.0)),
              ife_group("meanS", Law::normal(1.0, kSqrt2), Law::constant(0.0)),
              ife_group("distS", Law::normal(1.0, 1.0), Law::constant(0.0))};
  return d;
}

DgpSpec prop2_dynamic_panel() {
  DgpSpec d = base("prop2_dynamic_panel", Strategy::dynamic_panel, 3, 3);
  d.rho = 0.5;
  d.groups = {dyn_group("treated", Law::normal(1.0, 1.0), Law::normal(0.0, 1.0), 3),
              dyn_group("mean1", Law::normal(0.0, 1.0), Law::normal(2.0, kSqrt2)),
              dyn_group("dist1", Law::normal(0.0, 1.0), Law::normal(2.0, 1.0)),
              dyn_group("meanS", Law::normal(1.0, kSqrt2), Law::normal(0.0, 1.0)),
              dyn_group("distS", Law::normal(1.0, 1.0), Law::normal(0.0, 1.0))};
  return d;
}

DgpSpec prop3_did() {
  DgpSpec d = base("prop3_did", Strategy::did, 2, 2);
  d.S = 1;
  d.theta = {1.0, 1.0};
  d.groups = {did_group("treated", Law::normal(0.0, 1.0), 2), did_group("g2", Law::normal(1.0, 1.0)),
              did_group("g3", Law::normal(-1.0, kSqrt2))};
  return d;
}

DgpSpec prop3_ife() {
  DgpSpec d = base("prop3_ife", Strategy::ife, 3, 3);
  d.theta = {0.0, 1.0, 1.0};
  d.F = {{1.0}, {2.0}, {2.0}};
  d.groups = {ife_group("treated", Law::normal(0.0, 1.0), Law::normal(2.0, 1.0), 3),
              ife_group("g2", Law::normal(0.0, 1.0), Law::normal(0.0, 1.0)),
              ife_group("g3", Law::normal(1.0, 1.0), Law::normal(1.0, 1.0))};
  return d;
}

DgpSpec renamed(DgpSpec d, std::string name) {
  d.name = std::move(name);
  return d;
}

using Factory = DgpSpec (*)();

const std::vector<std::pair<std::string, Factory>>& registry() {
  static const std::vector<std::pair<std::string, Factory>> r = {
      {"did_matched", did_matched},
      {"cic_matched", cic_matched},
      {"lou_matched", lou_matched},
      {"ife_thm1iv", ife_thm1iv},
      {"cic_prop1ii", cic_prop1ii},
      {"lou_prop1iii", lou_prop1iii},
      {"dynpanel_prop2", dynpanel_prop2},
      {"cic_prop3ii", cic_prop3ii},
      {"lou_prop3iii", lou_prop3iii},
      {"latent_prop3v", latent_prop3v},
      {"mr_case1", mr_case1},
      {"mr_case2", mr_case2},
      {"separated", separated},
      {"lou_transfer_fullrank", lou_transfer_fullrank},
      {"cic_dist_th", cic_dist_th},
      {"staggered_did", staggered_did},
      {"prop1_did", prop1_did},
      {"prop1_cic", prop1_cic},
      {"prop1_lou", prop1_lou},
      {"prop1_ife", prop1_ife},
      {"prop1_latent", prop1_latent},
      {"prop2_linear_trend", prop2_linear_trend},
      {"prop2_dynamic_panel", prop2_dynamic_panel},
      {"prop3_did", prop3_did},
      {"prop3_ife", prop3_ife},
      {"prop3_cic", [] { return renamed(cic_prop3ii(), "prop3_cic"); }},
      {"prop3_lou", [] { return renamed(lou_prop3iii(), "prop3_lou"); }},
      {"prop3_latent", [] { return renamed(latent_prop3v(), "prop3_latent"); }},
  };
  return r;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, f] : registry()) out.push_back(name);
  return out;
}

DgpSpec preset(const std::string& name) {
  for (const auto& [n, f] : registry())
    if (n == name) return f();
  throw Error(ErrorKind::InvalidSpec, "unknown preset '" + name + "'", {{"available", preset_names()}});
}

std::vector<DgpSpec> counterexample_presets() {
  std::vector<DgpSpec> out;
  for (const auto& [n, f] : registry()) {
    DgpSpec d = f();
    if (!d.counterexample.empty() && d.counterexample == n) out.push_back(std::move(d));
  }
  return out;
}

}  // namespace ccg
