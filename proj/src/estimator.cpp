#include "ccg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ccg/error.hpp"
#include "ccg/rng.hpp"
#include "ccg/simd.hpp"
#include "ccg/stats.hpp"

namespace ccg {

void finalize_inference(AttEstimate& e) {
  e.std_error = e.n > 0 ? std::sqrt(e.variance / static_cast<double>(e.n)) : 0.0;
  const double z = stats::normal_quantile(1.0 - e.alpha / 2.0);
  e.ci = {e.att_hat - z * e.std_error, e.att_hat + z * e.std_error};
}

namespace detail {

namespace {

struct Moments {
  double sum = 0.0;
  double n = 0.0;
};

Moments slice_sum(const PanelDataset& data, std::size_t g, int t, int base) {
  auto y = data.outcomes(t, g);
  Moments m;
  m.n = static_cast<double>(y.size());
  m.sum = base > 0 ? simd::sum_diff(y, data.outcomes(base, g)) : simd::sum(y);
  return m;
}

double slice_ss(const PanelDataset& data, std::size_t g, int t, int base, double centre) {
  auto y = data.outcomes(t, g);
  return base > 0 ? simd::sum_sq_dev_diff(y, data.outcomes(base, g), centre) : simd::sum_sq_dev(y, centre);
}

}  // namespace

AttEstimate weighted_contrast(const PanelDataset& data, std::size_t treated, std::span<const std::size_t> groups,
                              std::span<const double> weights, int t, int base_period, const EstimateOptions& opts) {
  if (t < 1 || t > data.periods() || base_period < 0 || base_period > data.periods())
    throw Error(ErrorKind::PeriodOutOfRange, "period outside 1..T", {{"period", t}, {"T", data.periods()}});

  AttEstimate e;
  e.alpha = opts.alpha;
  e.period = t;
  e.base_period = base_period;
  e.n = data.units();
  const double n = static_cast<double>(e.n);

  const Moments m1 = slice_sum(data, treated, t, base_period);
  const double mean1 = m1.sum / m1.n;
  const double ss1 = slice_ss(data, treated, t, base_period, mean1);
  e.n_1 = static_cast<std::size_t>(m1.n);

  double contrast = 0.0;
  double pooled_sum = 0.0, pooled_n = 0.0;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const Moments mg = slice_sum(data, groups[k], t, base_period);
    contrast += weights[k] * (mg.sum / mg.n);
    pooled_sum += mg.sum;
    pooled_n += mg.n;
  }
  e.n_selected = static_cast<std::size_t>(pooled_n);
  const double mean_g = groups.empty() ? 0.0 : pooled_sum / pooled_n;
  double ss_g = 0.0;
  for (std::size_t g : groups) ss_g += slice_ss(data, g, t, base_period, mean_g);

  e.att_hat = mean1 - contrast;
  e.variance = n * (ss1 / (m1.n * m1.n) + (groups.empty() ? 0.0 : ss_g / (pooled_n * pooled_n)));
  finalize_inference(e);

  if (opts.keep_influence) {
    e.influence_values.assign(data.units(), 0.0);
    auto fill = [&](std::size_t g, double centre, double scale) {
      const GroupInfo& gi = data.group(g);
      for (std::size_t i = gi.begin; i < gi.end; ++i) {
        const double v = data.outcome(i, t) - (base_period > 0 ? data.outcome(i, base_period) : 0.0);
        e.influence_values[i] = scale * (v - centre);
      }
    };
    fill(treated, mean1, n / m1.n);
    for (std::size_t g : groups) fill(g, mean_g, -n / pooled_n);
  }
  return e;
}

}  // namespace detail

namespace {

std::size_t treated_index(const PanelDataset& data, const SelectionResult& s) {
  return s.treated_group.empty() ? data.treated_group() : data.group_index(s.treated_group);
}

int selection_t_star(const PanelDataset& data, const SelectionResult& s) {
  return s.t_star > 0 ? s.t_star : data.t_star();
}

void selected_groups(const PanelDataset& data, const SelectionResult& s, std::vector<std::size_t>& idx,
                     std::vector<double>& w) {
  if (s.selected.empty()) throw Error(ErrorKind::EmptySelection, "selection has no comparison groups");
  for (const auto& label : s.selected) {
    idx.push_back(data.group_index(label));
    w.push_back(s.weight(label));
  }
}

}  // namespace

AttEstimate att_estimate(const PanelDataset& data, const SelectionResult& selection, int t,
                         const EstimateOptions& opts) {
  const int t_star = selection_t_star(data, selection);
  if (t < t_star || t > data.periods())
    throw Error(ErrorKind::PeriodOutOfRange, "estimation period must lie in t*..T",
                {{"period", t}, {"t_star", t_star}, {"T", data.periods()}});
  std::vector<std::size_t> idx;
  std::vector<double> w;
  selected_groups(data, selection, idx, w);
  AttEstimate e = detail::weighted_contrast(data, treated_index(data, selection), idx, w, t, 0, opts);
  e.selection = selection;
  return e;
}

AttEstimate oracle_att(const PanelDataset& data, std::span<const std::string> true_gstar, int t,
                       const EstimateOptions& opts) {
  if (true_gstar.empty()) throw Error(ErrorKind::EmptySelection, "oracle set is empty");
  if (t < data.t_star() || t > data.periods())
    throw Error(ErrorKind::PeriodOutOfRange, "estimation period must lie in t*..T", {{"period", t}});
  std::vector<std::size_t> idx;
  std::vector<double> w;
  double total = 0.0;
  for (const auto& label : true_gstar) {
    const std::size_t g = data.group_index(label);
    if (data.group(g).ever_treated())
      throw Error(ErrorKind::ConfigError, "oracle set contains treated group '" + label + "'");
    idx.push_back(g);
    w.push_back(static_cast<double>(data.group(g).size()));
    total += w.back();
  }
  for (double& x : w) x /= total;
  return detail::weighted_contrast(data, data.treated_group(), idx, w, t, 0, opts);
}

AttEstimate multiply_robust_att(const PanelDataset& data, const SelectionResult& selection,
                                const EstimateOptions& opts) {
  const int t_star = selection_t_star(data, selection);
  if (t_star < 2) throw Error(ErrorKind::PeriodOutOfRange, "multiply robust contrast needs t* >= 2");
  std::vector<std::size_t> idx;
  std::vector<double> w;
  selected_groups(data, selection, idx, w);
  AttEstimate e = detail::weighted_contrast(data, treated_index(data, selection), idx, w, t_star, t_star - 1, opts);
  e.selection = selection;
  return e;
}

// ---------------------------------------------------------------------------
// Post-period placebo
// ---------------------------------------------------------------------------

namespace {

double equal_means_wald(std::span<const double> means, std::span<const double> vars) {
  bool degenerate = false;
  for (double v : vars) degenerate = degenerate || !(v > 0.0);
  if (degenerate) {
    for (double m : means)
      if (m != means.front()) return std::numeric_limits<double>::infinity();
    return 0.0;
  }
  double sw = 0.0, swm = 0.0;
  for (std::size_t k = 0; k < means.size(); ++k) {
    sw += 1.0 / vars[k];
    swm += means[k] / vars[k];
  }
  const double centre = swm / sw;
  double w = 0.0;
  for (std::size_t k = 0; k < means.size(); ++k) w += (means[k] - centre) * (means[k] - centre) / vars[k];
  return w;
}

void group_stats(std::span<const double> y, double& mean, double& var_of_mean) {
  const double n = static_cast<double>(y.size());
  mean = simd::sum(y) / n;
  var_of_mean = simd::sum_sq_dev(y, mean) / (n - 1.0) / n;
}

}  // namespace

PlaceboReport placebo_test(const PanelDataset& data, const SelectionResult& selection, int t,
                           const PlaceboOptions& opts) {
  if (selection.selected.size() < 2)
    throw Error(ErrorKind::TooFewGroups, "placebo test needs at least two selected groups",
                {{"selected", selection.selected.size()}});
  const int t_star = selection_t_star(data, selection);
  if (t < t_star || t > data.periods())
    throw Error(ErrorKind::PeriodOutOfRange, "placebo period must lie in t*..T", {{"period", t}});

  PlaceboReport r;
  r.period = t;
  std::vector<double> means, vars;
  std::vector<std::size_t> idx;
  for (const auto& label : selection.selected) {
    const std::size_t g = data.group_index(label);
    idx.push_back(g);
    double m, v;
    group_stats(data.outcomes(t, g), m, v);
    means.push_back(m);
    vars.push_back(v);
    r.group_means.emplace_back(label, m);
  }
  r.wald_stat = equal_means_wald(means, vars);
  r.dof = static_cast<int>(means.size()) - 1;
  r.p_value = stats::chi2_sf(r.wald_stat, r.dof);

  if (opts.permutations > 0) {
    std::vector<double> pool;
    std::vector<std::size_t> sizes;
    for (std::size_t g : idx) {
      auto y = data.outcomes(t, g);
      pool.insert(pool.end(), y.begin(), y.end());
      sizes.push_back(y.size());
    }
    std::size_t exceed = 0;
    for (std::size_t b = 0; b < opts.permutations; ++b) {
      rng::UnitStream stream(opts.seed, 0xFFFFu, static_cast<std::uint32_t>(b));
      for (std::size_t i = pool.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(stream.uniform() * static_cast<double>(i + 1));
        std::swap(pool[i], pool[std::min(j, i)]);
      }
      std::size_t offset = 0;
      for (std::size_t k = 0; k < sizes.size(); ++k) {
        group_stats(std::span<const double>(pool).subspan(offset, sizes[k]), means[k], vars[k]);
        offset += sizes[k];
      }
      exceed += equal_means_wald(means, vars) >= r.wald_stat;
    }
    r.permutations = opts.permutations;
    r.permutation_p_value = static_cast<double>(exceed + 1) / static_cast<double>(opts.permutations + 1);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Discrete covariate cells
// ---------------------------------------------------------------------------

ConditionalResult att_conditional(const PanelDataset& data, const PipelineConfig& config, int t) {
  if (!data.has_covariate()) throw Error(ErrorKind::ConfigError, "dataset has no covariate column");
  if (t == 0) t = data.t_star();
  const std::size_t treated = data.treated_group();

  ConditionalResult out;
  for (std::size_t x = 0; x < data.covariate_levels().size(); ++x) {
    std::vector<std::size_t> units;
    std::size_t n_treated = 0;
    for (std::size_t i = 0; i < data.units(); ++i) {
      if (data.covariate(i) != static_cast<int>(x)) continue;
      units.push_back(i);
      n_treated += data.group_of(i) == treated;
    }
    if (n_treated == 0) continue;
    if (n_treated < config.min_cell)
      throw Error(ErrorKind::TooFewUnits, "treated units in covariate cell below min_cell",
                  {{"level", data.covariate_levels()[x]}, {"n_treated", n_treated}, {"min_cell", config.min_cell}});

    ConditionalCell cell;
    cell.level = data.covariate_levels()[x];
    cell.n_treated = n_treated;
    const PanelDataset sub = data.subset(units);
    Design design;
    design.treated = sub.group_index(data.treated_label());
    design.t_star = sub.group(design.treated).first_treated;
    for (std::size_t g : sub.comparison_groups())
      if (sub.group(g).size() >= 2) design.candidates.push_back(g);
    if (design.candidates.empty()) {
      cell.trimmed = true;
      cell.reason = "no comparison units in cell";
    } else {
      try {
        const SelectionResult s = run_selection(sub, design, config);
        cell.estimate = att_estimate(sub, s, t, {config.alpha, false});
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoCloseComparisonGroups) throw;
        cell.trimmed = true;
        cell.reason = "empty selection";
      }
    }
    out.cells.push_back(std::move(cell));
  }

  double n1 = 0.0;
  for (const auto& c : out.cells)
    if (!c.trimmed) n1 += static_cast<double>(c.n_treated);
  if (n1 == 0.0) throw Error(ErrorKind::NoCellsSurviveTrimming, "every covariate cell was trimmed");

  AttEstimate& agg = out.aggregate;
  agg.alpha = config.alpha;
  agg.period = t;
  agg.n = data.units();
  double var_within = 0.0;
  for (const auto& c : out.cells) {
    if (c.trimmed) continue;
    const double pi = static_cast<double>(c.n_treated) / n1;
    agg.att_hat += pi * c.estimate->att_hat;
    var_within += pi * pi * c.estimate->std_error * c.estimate->std_error;
    agg.n_1 += c.n_treated;
    agg.n_selected += c.estimate->n_selected;
  }
  double var_mix = 0.0;
  for (const auto& c : out.cells) {
    if (c.trimmed) continue;
    const double pi = static_cast<double>(c.n_treated) / n1;
    const double d = c.estimate->att_hat - agg.att_hat;
    var_mix += pi * d * d / n1;
  }
  const double se2 = var_within + var_mix;
  agg.variance = se2 * static_cast<double>(agg.n);
  finalize_inference(agg);
  return out;
}

// ---------------------------------------------------------------------------
// Staggered adoption
// ---------------------------------------------------------------------------

namespace {

AggregateEstimate aggregate_influence(std::span<const std::pair<double, const AttEstimate*>> parts, std::size_t n,
                                      double alpha) {
  AggregateEstimate a;
  std::vector<double> psi(n, 0.0);
  for (const auto& [w, est] : parts) {
    a.att += w * est->att_hat;
    for (std::size_t i = 0; i < n; ++i) psi[i] += w * est->influence_values[i];
  }
  const double nd = static_cast<double>(n);
  const double v = simd::sum_sq_dev(psi, 0.0) / nd;
  a.std_error = std::sqrt(v / nd);
  const double z = stats::normal_quantile(1.0 - alpha / 2.0);
  a.ci = {a.att - z * a.std_error, a.att + z * a.std_error};
  a.cells = parts.size();
  return a;
}

}  // namespace

GroupTimeResult att_group_time(const PanelDataset& data, const PipelineConfig& config) {
  GroupTimeResult out;
  for (std::size_t g : data.treated_groups()) {
    const GroupInfo& gi = data.group(g);
    for (int t = gi.first_treated; t <= data.periods(); ++t) {
      GroupTimeCell cell;
      cell.group = gi.label;
      cell.first_treated = gi.first_treated;
      cell.period = t;
      Design design;
      design.treated = g;
      design.t_star = gi.first_treated;
      for (std::size_t h = 0; h < data.groups().size(); ++h) {
        const GroupInfo& hi = data.group(h);
        if (h == g || hi.size() < 2) continue;
        if (hi.first_treated == 0 || hi.first_treated > t) design.candidates.push_back(h);
      }
      if (design.candidates.empty()) {
        cell.skipped_reason = "NoCandidatesForCell";
      } else if (gi.first_treated - config.S < 1) {
        cell.skipped_reason = "InsufficientPrePeriods";
      } else {
        try {
          const SelectionResult s = run_selection(data, design, config);
          cell.estimate = att_estimate(data, s, t, {config.alpha, true});
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NoCloseComparisonGroups) throw;
          cell.skipped_reason = "NoCloseComparisonGroups";
        }
      }
      out.cells.push_back(std::move(cell));
    }
  }

  std::map<int, std::vector<const GroupTimeCell*>> by_e;
  std::map<std::string, std::vector<const GroupTimeCell*>> by_group;
  for (const auto& c : out.cells) {
    if (!c.estimate) continue;
    by_e[c.period - c.first_treated].push_back(&c);
    by_group[c.group].push_back(&c);
  }
  if (by_group.empty()) {
    nlohmann::json skipped = nlohmann::json::array();
    for (const auto& c : out.cells)
      skipped.push_back({{"group", c.group}, {"period", c.period}, {"reason", c.skipped_reason}});
    throw Error(ErrorKind::NoCandidatesForCell, "no (group, period) cell could be estimated", {{"skipped", skipped}});
  }

  const std::size_t n = data.units();
  for (const auto& [e, cells] : by_e) {
    double total = 0.0;
    for (auto* c : cells) total += static_cast<double>(data.group(data.group_index(c->group)).size());
    std::vector<std::pair<double, const AttEstimate*>> parts;
    for (auto* c : cells)
      parts.emplace_back(static_cast<double>(data.group(data.group_index(c->group)).size()) / total, &*c->estimate);
    out.event_study[e] = aggregate_influence(parts, n, config.alpha);
  }

  double total = 0.0;
  for (const auto& [label, cells] : by_group) total += static_cast<double>(data.group(data.group_index(label)).size());
  std::vector<std::pair<double, const AttEstimate*>> parts;
  for (const auto& [label, cells] : by_group) {
    const double share = static_cast<double>(data.group(data.group_index(label)).size()) / total;
    for (auto* c : cells) parts.emplace_back(share / static_cast<double>(cells.size()), &*c->estimate);
  }
  out.overall = aggregate_influence(parts, n, config.alpha);
  return out;
}

}  // namespace ccg
