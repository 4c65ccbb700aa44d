#include "ccg/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "ccg/error.hpp"
#include "ccg/estimator.hpp"
#include "ccg/pipeline.hpp"
#include "ccg/rng.hpp"
#include "ccg/timehomog.hpp"

namespace ccg {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string_view to_string(EstimandKind k) {
  switch (k) {
    case EstimandKind::att: return "att";
    case EstimandKind::oracle: return "oracle";
    case EstimandKind::tau_mr: return "tau_mr";
    case EstimandKind::tau_th: return "tau_th";
    case EstimandKind::placebo: return "placebo";
  }
  return "att";
}

EstimandKind parse_estimand_kind(std::string_view s) {
  for (auto k : {EstimandKind::att, EstimandKind::oracle, EstimandKind::tau_mr, EstimandKind::tau_th,
                 EstimandKind::placebo})
    if (to_string(k) == s) return k;
  throw Error(ErrorKind::ConfigError, "unknown estimand '" + std::string(s) + "'");
}

bool EstimandSummary::unbiased() const { return ok > 0 && std::abs(bias) < 3.0 * mc_se; }

const EstimandSummary& McSummary::at(std::string_view name) const {
  for (const auto& e : estimands)
    if (e.spec.name == name) return e;
  throw Error(ErrorKind::ConfigError, "no estimand named '" + std::string(name) + "' in summary");
}

std::vector<EstimandSpec> default_estimands(const DgpSpec&) {
  return {{"att", EstimandKind::att, {}, 0}, {"oracle", EstimandKind::oracle, {}, 0}};
}

namespace {

struct Draw {
  bool ok = false;
  double estimate = kNaN;
  double variance = kNaN;
  double std_error = kNaN;
  double lo = kNaN, hi = kNaN;
  std::string error_kind;
  std::string message;
};

struct RepResult {
  std::vector<Draw> draws;
  bool selection_ran = false;
  bool selection_exact = false;
  std::size_t n_selected = 0;
};

bool needs_selection(const EstimandSpec& e) {
  return e.groups.empty() && (e.kind == EstimandKind::att || e.kind == EstimandKind::tau_mr ||
                              e.kind == EstimandKind::placebo);
}

// Population value of an estimand, from the truth block.
double estimand_value(const DgpSpec& spec, const Truth& truth, const EstimandSpec& e) {
  const int t = e.period ? e.period : spec.t_star;
  auto weighted = [&](const std::string& prefix, const std::vector<std::string>& labels) {
    if (labels.empty()) return kNaN;
    double total = 0.0, acc = 0.0;
    for (const auto& label : labels) {
      auto it = truth.known_bias.find(prefix + label);
      if (it == truth.known_bias.end()) return kNaN;
      double w = 0.0;
      for (const auto& g : spec.groups)
        if (g.label == label) w = static_cast<double>(spec.group_size(g));
      total += w;
      acc += w * it->second;
    }
    return spec.att + acc / total;
  };
  const std::vector<std::string>& set = e.groups.empty() ? truth.gstar_true : e.groups;
  switch (e.kind) {
    case EstimandKind::att:
    case EstimandKind::oracle: return t == spec.t_star ? weighted("tau_g:", set) : kNaN;
    case EstimandKind::tau_mr: return weighted("tau_mr_g:", set);
    case EstimandKind::tau_th: {
      auto it = truth.known_bias.find("tau_th_" + std::to_string(t));
      return it == truth.known_bias.end() ? kNaN : spec.att + it->second;
    }
    case EstimandKind::placebo: return kNaN;
  }
  return kNaN;
}

Draw from_estimate(const AttEstimate& a) {
  Draw d;
  d.ok = true;
  d.estimate = a.att_hat;
  d.variance = a.variance;
  d.std_error = a.std_error;
  d.lo = a.ci.first;
  d.hi = a.ci.second;
  return d;
}

RepResult run_rep(const DgpSpec& base, const PipelineConfig& config, const std::vector<EstimandSpec>& estimands,
                  const Truth& truth, std::uint64_t master_seed, std::size_t rep) {
  DgpSpec spec = base;
  spec.seed = rng::derive_seed(master_seed, rep);
  const PanelDataset data = generate_panel(spec, 1);
  RepResult out;
  out.draws.resize(estimands.size());

  std::optional<SelectionResult> selection;
  std::optional<Error> selection_error;
  if (std::any_of(estimands.begin(), estimands.end(), needs_selection)) {
    out.selection_ran = true;
    try {
      selection = run_selection(data, config);
      out.n_selected = selection->selected.size();
      std::vector<std::string> a = selection->selected, b = truth.gstar_true;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      out.selection_exact = a == b;
    } catch (const Error& e) {
      selection_error = e;
      out.selection_exact = truth.gstar_true.empty();
    }
  }

  const EstimateOptions eopts{config.alpha, false};
  for (std::size_t k = 0; k < estimands.size(); ++k) {
    const EstimandSpec& e = estimands[k];
    const int t = e.period ? e.period : data.t_star();
    Draw& d = out.draws[k];
    try {
      auto chosen = [&]() -> SelectionResult {
        if (!e.groups.empty()) return declared_selection(data, e.groups);
        if (selection_error) throw *selection_error;
        return *selection;
      };
      switch (e.kind) {
        case EstimandKind::att: d = from_estimate(att_estimate(data, chosen(), t, eopts)); break;
        case EstimandKind::oracle: {
          const auto& set = e.groups.empty() ? truth.gstar_true : e.groups;
          d = from_estimate(oracle_att(data, set, t, eopts));
          break;
        }
        case EstimandKind::tau_mr: d = from_estimate(multiply_robust_att(data, chosen(), eopts)); break;
        case EstimandKind::tau_th: d = from_estimate(tau_th(data, t, eopts)); break;
        case EstimandKind::placebo: {
          PlaceboOptions popts{0, spec.seed};
          const PlaceboReport p = placebo_test(data, chosen(), t, popts);
          d.ok = true;
          d.estimate = p.p_value;
          break;
        }
      }
    } catch (const Error& err) {
      d = Draw{};
      d.error_kind = std::string(to_string(err.kind()));
      d.message = err.what();
    }
  }
  return out;
}

}  // namespace

McSummary run_mc(const DgpSpec& spec_in, const PipelineConfig& config, const std::vector<EstimandSpec>& estimands,
                 const McOptions& opts) {
  if (opts.reps < 2) throw Error(ErrorKind::ConfigError, "run_mc needs at least two replications");
  if (estimands.empty()) throw Error(ErrorKind::ConfigError, "no estimands requested");
  DgpSpec spec = spec_in;
  if (opts.n_per_group) {
    spec.n_per_group = *opts.n_per_group;
    for (auto& g : spec.groups) g.n = 0;
  }
  validate(spec);
  const Truth truth = compute_truth(spec);

  std::vector<RepResult> results(opts.reps);
  const std::size_t limit =
      static_cast<std::size_t>(std::floor(opts.failure_budget * static_cast<double>(opts.reps * estimands.size())));
  std::atomic<std::size_t> next{0}, failures{0};
  std::atomic<bool> abort{false};
  auto worker = [&]() {
    for (;;) {
      if (abort.load()) return;
      const std::size_t r = next.fetch_add(1);
      if (r >= opts.reps) return;
      results[r] = run_rep(spec, config, estimands, truth, opts.master_seed, r);
      std::size_t f = 0;
      for (const auto& d : results[r].draws) f += !d.ok;
      if (f && failures.fetch_add(f) + f > limit) abort.store(true);
    }
  };
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, opts.reps));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  McSummary s;
  s.spec = spec;
  s.config = config;
  s.reps = opts.reps;
  s.master_seed = opts.master_seed;
  s.n_per_group = spec.n_per_group;
  s.gstar_true = truth.gstar_true;

  if (abort.load()) {
    // Report the earliest failure in replication order.
    for (std::size_t r = 0; r < opts.reps; ++r)
      for (std::size_t k = 0; k < estimands.size(); ++k)
        if (!results[r].draws.empty() && !results[r].draws[k].ok)
          throw Error(ErrorKind::FailureBudgetExceeded, "replication failures exceeded the budget",
                      {{"rep", r}, {"estimand", estimands[k].name}, {"error", results[r].draws[k].error_kind},
                       {"message", results[r].draws[k].message}, {"budget", opts.failure_budget}});
  }

  std::size_t sel_runs = 0, sel_exact = 0, sel_total = 0;
  for (const auto& r : results)
    if (r.selection_ran) {
      ++sel_runs;
      sel_exact += r.selection_exact;
      sel_total += r.n_selected;
    }
  if (sel_runs) {
    s.selection_exact_rate = static_cast<double>(sel_exact) / static_cast<double>(sel_runs);
    s.mean_selected = static_cast<double>(sel_total) / static_cast<double>(sel_runs);
  }

  for (std::size_t k = 0; k < estimands.size(); ++k) {
    EstimandSummary es;
    es.spec = estimands[k];
    es.att_true = spec.att;
    es.estimand_value = estimand_value(spec, truth, estimands[k]);
    es.analytic_bias = es.estimand_value - spec.att;
    double sum = 0.0, var_sum = 0.0, se_sum = 0.0;
    std::size_t covered = 0;
    for (std::size_t r = 0; r < opts.reps; ++r) {
      const Draw& d = results[r].draws[k];
      if (opts.keep_per_rep) es.per_rep.push_back(d.estimate);
      if (!d.ok) {
        ++es.failed;
        s.failures.push_back({r, estimands[k].name, d.error_kind, d.message});
        continue;
      }
      ++es.ok;
      sum += d.estimate;
      var_sum += d.variance;
      se_sum += d.std_error;
      covered += d.lo <= spec.att && spec.att <= d.hi;
    }
    if (es.ok) {
      const double n = static_cast<double>(es.ok);
      es.mean_estimate = sum / n;
      double ss = 0.0, sq = 0.0;
      for (std::size_t r = 0; r < opts.reps; ++r) {
        const Draw& d = results[r].draws[k];
        if (!d.ok) continue;
        ss += (d.estimate - es.mean_estimate) * (d.estimate - es.mean_estimate);
        sq += (d.estimate - spec.att) * (d.estimate - spec.att);
      }
      es.bias = es.mean_estimate - spec.att;
      es.sd_estimate = es.ok > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      es.mc_se = es.sd_estimate / std::sqrt(n);
      es.rmse = std::sqrt(sq / n);
      es.coverage = static_cast<double>(covered) / n;
      es.mean_variance = var_sum / n;
      es.mean_std_error = se_sum / n;
    }
    s.estimands.push_back(std::move(es));
  }
  return s;
}

}  // namespace ccg
