#include "ccg/report.hpp"

#include <cmath>
#include <cstdio>

namespace ccg {

using nlohmann::json;

namespace {

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vec(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v(i)));
  return out;
}

json mat(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vec(m.row(i).transpose()));
  return out;
}

json aggregate(const AggregateEstimate& a) {
  return {{"att", num(a.att)}, {"std_error", num(a.std_error)}, {"ci", {num(a.ci.first), num(a.ci.second)}},
          {"cells", a.cells}};
}

}  // namespace

json to_json(const PipelineConfig& c) {
  json j = {{"metric", std::string(to_string(c.metric))},
            {"kernel", std::string(to_string(c.kernel.kind))},
            {"bandwidth", c.bandwidth ? json(*c.bandwidth) : json(nullptr)},
            {"bandwidth_scale", c.bandwidth_scale},
            {"S", c.S},
            {"J", c.J},
            {"alpha", c.alpha},
            {"ridge", c.ridge},
            {"rcond_threshold", c.rcond_threshold},
            {"min_cell", c.min_cell},
            {"placebo_permutations", c.placebo_permutations},
            {"seed", c.seed},
            {"th_mode", std::string(to_string(c.th.mode))},
            {"th_alpha", c.th.alpha},
            {"th_tol", c.th.tol}};
  return j;
}

json to_json(const DistanceReport& d) {
  json j = {{"group", d.group},       {"metric", std::string(to_string(d.metric))},
            {"d_hat", num(d.d_hat)},  {"numerator", num(d.numerator)},
            {"scale", num(d.scale)}};
  if (d.metric == Metric::mean) j["rcond"] = num(d.rcond);
  if (d.se_proxy) j["se_proxy"] = num(*d.se_proxy);
  return j;
}

json to_json(const SelectionResult& s) {
  json groups = json::array();
  for (std::size_t k = 0; k < s.distances.size(); ++k) {
    json g = to_json(s.distances[k]);
    g["weight"] = num(s.weights[k]);
    g["selected"] = s.weights[k] > 0.0;
    groups.push_back(g);
  }
  return {{"bandwidth", num(s.bandwidth)},        {"metric", std::string(to_string(s.metric))},
          {"kernel", std::string(to_string(s.kernel.kind))}, {"treated_group", s.treated_group},
          {"treated_excluded", s.treated_excluded}, {"t_star", s.t_star},
          {"selected", s.selected},               {"groups", groups}};
}

json to_json(const AttEstimate& e) {
  json j = {{"att_hat", num(e.att_hat)}, {"variance", num(e.variance)}, {"std_error", num(e.std_error)},
            {"ci", {num(e.ci.first), num(e.ci.second)}}, {"alpha", e.alpha}, {"period", e.period},
            {"n", e.n}, {"n_1", e.n_1}, {"n_selected", e.n_selected}};
  if (e.base_period) j["base_period"] = e.base_period;
  return j;
}

json to_json(const PlaceboReport& p) {
  json means = json::array();
  for (const auto& [g, m] : p.group_means) means.push_back({{"group", g}, {"mean", num(m)}});
  json j = {{"period", p.period}, {"group_means", means}, {"wald_stat", num(p.wald_stat)},
            {"dof", p.dof},       {"p_value", num(p.p_value)}};
  if (p.permutation_p_value) {
    j["permutation_p_value"] = num(*p.permutation_p_value);
    j["permutations"] = p.permutations;
  }
  return j;
}

json to_json(const TimeHomogReport& r) {
  json tests = json::array();
  for (const auto& [t, pt] : r.per_period_tests)
    tests.push_back({{"period", t}, {"wald_stat", num(pt.wald_stat)}, {"dof", pt.dof}, {"p_value", num(pt.p_value)},
                     {"max_std_change", num(pt.max_std_change)}, {"passes", pt.passes}});
  return {{"mode", std::string(to_string(r.mode))}, {"t_th_mean", r.t_th_mean},
          {"homogeneous_periods", r.homogeneous_periods}, {"tests", tests}};
}

json to_json(const TransferResult& r) {
  return {{"beta", vec(r.beta)}, {"transfer_holds", r.transfer_holds}, {"psi", mat(r.psi)}, {"rhs", vec(r.rhs)},
          {"singular_values", vec(r.singular_values)}, {"rank_threshold", num(r.rank_threshold)}};
}

json to_json(const ConditionalResult& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    json jc = {{"level", c.level}, {"n_treated", c.n_treated}, {"trimmed", c.trimmed}};
    if (!c.reason.empty()) jc["reason"] = c.reason;
    if (c.estimate) {
      jc["estimate"] = to_json(*c.estimate);
      if (c.estimate->selection) jc["selection"] = to_json(*c.estimate->selection);
    }
    cells.push_back(jc);
  }
  return {{"cells", cells}, {"aggregate", to_json(r.aggregate)}};
}

json to_json(const GroupTimeResult& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    json jc = {{"group", c.group}, {"first_treated", c.first_treated}, {"period", c.period}};
    if (c.estimate)
      jc["estimate"] = to_json(*c.estimate);
    else
      jc["skipped_reason"] = c.skipped_reason;
    cells.push_back(jc);
  }
  json es = json::object();
  for (const auto& [e, a] : r.event_study) es[std::to_string(e)] = aggregate(a);
  return {{"cells", cells}, {"event_study", es}, {"overall", aggregate(r.overall)}};
}

json to_json(const EstimandSummary& s) {
  json j = {{"name", s.spec.name},
            {"kind", std::string(to_string(s.spec.kind))},
            {"groups", s.spec.groups},
            {"period", s.spec.period},
            {"att_true", num(s.att_true)},
            {"estimand_value", num(s.estimand_value)},
            {"analytic_bias", num(s.analytic_bias)},
            {"ok", s.ok},
            {"failed", s.failed},
            {"mean_estimate", num(s.mean_estimate)},
            {"bias", num(s.bias)},
            {"sd_estimate", num(s.sd_estimate)},
            {"mc_se", num(s.mc_se)},
            {"rmse", num(s.rmse)},
            {"coverage", num(s.coverage)},
            {"mean_variance", num(s.mean_variance)},
            {"mean_std_error", num(s.mean_std_error)},
            {"unbiased", s.unbiased()}};
  if (!s.per_rep.empty()) {
    json reps = json::array();
    for (double x : s.per_rep) reps.push_back(num(x));
    j["per_rep"] = reps;
  }
  return j;
}

json to_json(const McSummary& s) {
  json est = json::array();
  for (const auto& e : s.estimands) est.push_back(to_json(e));
  json fails = json::array();
  for (const auto& f : s.failures)
    fails.push_back({{"rep", f.rep}, {"estimand", f.estimand}, {"error", f.kind}, {"message", f.message}});
  json j = {{"spec", to_json(s.spec)},        {"config", to_json(s.config)}, {"reps", s.reps},
            {"master_seed", s.master_seed},   {"n_per_group", s.n_per_group}, {"gstar_true", s.gstar_true},
            {"mean_selected", s.mean_selected}, {"estimands", est},          {"failures", fails}};
  j["selection_exact_rate"] = s.selection_exact_rate ? json(*s.selection_exact_rate) : json(nullptr);
  return j;
}

json to_json(const RobustnessTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json cells = json::array();
    for (const auto& c : r.cells)
      cells.push_back({{"column", c.column}, {"preset", c.preset}, {"estimand", c.estimand},
                       {"expected_unbiased", c.expected_unbiased}, {"observed_unbiased", c.observed_unbiased},
                       {"summary", to_json(c.summary)}});
    rows.push_back({{"strategy", r.strategy}, {"cells", cells}});
  }
  return {{"table", t.name}, {"columns", t.columns}, {"rows", rows}, {"matches_expected", t.matches_expected()}};
}

std::string config_hash(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ccg
