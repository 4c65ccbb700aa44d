#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccg/panel.hpp"
#include "ccg/rng.hpp"

namespace ccg {

enum class Strategy { did, cic, lou, ife, latent, linear_trend, dynamic_panel };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view s);

// A scalar law. Normal(mean = a, sd = b); Uniform(a, b); Triangular(a, b,
// mode c); Constant(a).
struct Law {
  enum class Kind { normal, uniform, triangular, constant };
  Kind kind = Kind::constant;
  double a = 0.0, b = 0.0, c = 0.0;

  static Law normal(double mean, double sd) { return {Kind::normal, mean, sd, 0.0}; }
  static Law uniform(double lo, double hi) { return {Kind::uniform, lo, hi, 0.0}; }
  static Law triangular(double lo, double hi, double mode) { return {Kind::triangular, lo, hi, mode}; }
  static Law constant(double v) { return {Kind::constant, v, 0.0, 0.0}; }

  double draw(rng::UnitStream& s) const;
  double mean() const;
  double variance() const;
  double pdf(double x) const;
  // Support used for numerical integration.
  std::pair<double, double> support() const;
  bool gaussian() const { return kind == Kind::normal || kind == Kind::constant; }
  bool operator==(const Law&) const = default;
};

// Strictly increasing period map for the change-in-changes strategy.
struct PeriodMap {
  enum class Kind { identity, affine, cubic, chi2_quantile, perturbation };
  Kind kind = Kind::identity;
  double a = 0.0, b = 1.0, c = 0.0;  // affine a + b y; cubic a + b y + c y^3
  double epsilon = 0.0;              // perturbation y + eps * sum_k w_k phi(y - m_k)
  std::vector<double> centers;
  std::vector<double> coefs;

  double apply(double y) const;
  double derivative(double y) const;
  bool operator==(const PeriodMap&) const = default;
};

struct GroupParams {
  std::string label;
  std::size_t n = 0;        // 0 = spec.n_per_group
  int first_treated = 0;    // 0 = never treated
  Law eta = Law::constant(0.0);   // did / ife / linear_trend / dynamic_panel
  std::vector<Law> lambda;        // ife loadings (R), linear_trend slope (1)
  Law u = Law::constant(0.0);     // cic latent rank variable
  std::vector<Law> xi;            // latent
  Law lag = Law::constant(0.0);   // lou: Y at t*-1
  Law pre = Law::constant(0.0);   // lou: Y before t*-1
  Law y1 = Law::constant(0.0);    // dynamic_panel initial condition
  bool operator==(const GroupParams&) const = default;
};

struct DgpSpec {
  std::string name;
  Strategy strategy = Strategy::did;
  std::size_t n_per_group = 1000;
  int T = 2;
  int t_star = 2;
  double att = 0.0;
  double att_sd = 0.0;  // unit-level effect heterogeneity around att
  std::uint64_t seed = 0;
  std::string counterexample;
  bool rank_deficient = false;
  int S = 2;  // window for the mean(S) / dist(S) truth sets

  std::vector<GroupParams> groups;
  std::vector<double> theta;             // T
  double noise_sd = 1.0;
  std::vector<std::vector<double>> F;    // ife: T x R
  std::vector<std::vector<double>> a;    // latent: T x L
  std::vector<double> b;                 // latent: T, coefficient on xi_1^2
  std::vector<PeriodMap> maps;           // cic: T
  std::vector<std::vector<double>> transition;  // lou: per period >= t*, {c0, c1, c2} in lag
  double rho = 0.0;                      // dynamic_panel

  std::size_t group_size(const GroupParams& g) const { return g.n ? g.n : n_per_group; }
  // Index of the earliest-treated group.
  std::size_t treated_index() const;
};

void validate(const DgpSpec& spec);
nlohmann::json to_json(const DgpSpec& spec);
DgpSpec dgp_from_json(const nlohmann::json& j);

// Population quantities computed from the parameters.
struct PopulationMoments {
  std::vector<std::vector<double>> mean;  // [group][t-1], untreated potential outcome
  std::vector<std::vector<double>> var;   // [group][t-1]; NaN when not available in closed form
  std::string method;                     // closed_form | quadrature
};

PopulationMoments population_moments(const DgpSpec& spec);

struct Truth {
  double att_true = 0.0;
  std::vector<std::string> gstar_true;    // dist(1) match at t*-1
  std::vector<std::string> gstar_mean_1;
  std::vector<std::string> gstar_mean_S;
  std::vector<std::string> gstar_dist_S;
  int S = 2;
  std::map<std::string, double> known_bias;
  std::string method;
};

nlohmann::json to_json(const Truth& truth);

// Estimands at t* (and tau_th_t for every post period):
//   tau, tau_mean_1, tau_mean_S, tau_dist_S   p-weighted over the truth sets
//   tau_g:<label>                             single comparison group
//   tau_mr_g:<label>                          before/after contrast with one group
//   tau_th, tau_th_<t>                        treated change since t*-1
// Values are potential-outcome contrasts plus the ATT.
std::map<std::string, double> population_estimands(const DgpSpec& spec);
Truth compute_truth(const DgpSpec& spec);

struct Generated {
  PanelDataset data;
  Truth truth;
};

// Unit streams are keyed by (seed, group, unit); `threads` only affects speed.
PanelDataset generate_panel(const DgpSpec& spec, unsigned threads = 1);
Generated generate(const DgpSpec& spec, unsigned threads = 1);

// Preset catalog.
std::vector<DgpSpec> counterexample_presets();
DgpSpec preset(const std::string& name);
std::vector<std::string> preset_names();

// Perturbation weights (c_2, c_3) making the mean change of the N(2,1) and
// N(3,1) groups vanish under y + eps * q(y).
std::pair<double, double> cic_prop3ii_weights();

}  // namespace ccg
