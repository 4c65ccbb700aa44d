// ccg: close comparison groups command line.
//
// Every subcommand accepts --config FILE with TOML-style `key = value` lines
// whose keys are the long option names (without dashes). Flags given on the
// command line override values from the file.

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccg/dgp.hpp"
#include "ccg/error.hpp"
#include "ccg/estimator.hpp"
#include "ccg/montecarlo.hpp"
#include "ccg/panel.hpp"
#include "ccg/pipeline.hpp"
#include "ccg/report.hpp"
#include "ccg/timehomog.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct InputOptions {
  std::string input;
  std::string sidecar;
  ccg::Schema schema;
};

struct PipelineOptions {
  std::string metric = "wasserstein";
  std::string kernel = "uniform";
  std::optional<double> bandwidth;
  double bandwidth_scale = 0.5;
  int S = 1;
  int J = 99;
  double alpha = 0.05;
  bool ridge = false;
  double rcond_threshold = 1e-10;
  std::size_t min_cell = 10;
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
  std::string th_mode = "test";
  double th_alpha = 0.05;
  double th_tol = 0.1;
};

struct OutputOptions {
  std::string output;
  bool force = false;
};

void add_input(CLI::App* app, InputOptions& o) {
  app->add_option("--input,-i", o.input, "panel CSV (long format)")->required();
  app->add_option("--sidecar", o.sidecar, "JSON group metadata used when the treated column is absent");
  app->add_option("--unit-col", o.schema.unit, "unit id column")->capture_default_str();
  app->add_option("--group-col", o.schema.group, "group column")->capture_default_str();
  app->add_option("--time-col", o.schema.time, "period column (integers 1..T)")->capture_default_str();
  app->add_option("--outcome-col", o.schema.outcome, "outcome column")->capture_default_str();
  app->add_option("--treated-col", o.schema.treated, "0/1 treatment column")->capture_default_str();
  app->add_option("--covariate-col", o.schema.covariate, "discrete covariate column for conditional estimates");
  app->add_flag("--staggered", o.schema.allow_staggered, "allow several treated groups with different start periods");
}

void add_pipeline(CLI::App* app, PipelineOptions& o) {
  app->add_option("--metric", o.metric, "distance metric: wasserstein | mean")->capture_default_str();
  app->add_option("--kernel", o.kernel, "kernel: uniform | epanechnikov | triangular")->capture_default_str();
  app->add_option("--bandwidth", o.bandwidth, "fixed bandwidth h (default: scale * n_min^(-1/6))");
  app->add_option("--bandwidth-scale", o.bandwidth_scale, "constant c of the automatic bandwidth")
      ->capture_default_str();
  app->add_option("-S,--pre-periods", o.S, "pre-treatment periods used by the profiles")->capture_default_str();
  app->add_option("-J,--grid", o.J, "quantile grid size")->capture_default_str();
  app->add_option("--alpha", o.alpha, "confidence level complement")->capture_default_str();
  app->add_flag("--ridge", o.ridge, "regularize a near-singular pooled covariance (mean metric)");
  app->add_option("--rcond-threshold", o.rcond_threshold, "smallest accepted reciprocal condition number")
      ->capture_default_str();
  app->add_option("--min-cell", o.min_cell, "smallest treated count per covariate cell")->capture_default_str();
  app->add_option("--permutations", o.permutations, "placebo permutation draws (0 = off)")->capture_default_str();
  app->add_option("--seed", o.seed, "seed for randomized procedures")->capture_default_str();
  app->add_option("--th-mode", o.th_mode, "time homogeneity detection: test | tolerance")->capture_default_str();
  app->add_option("--th-alpha", o.th_alpha, "level of the time homogeneity test")->capture_default_str();
  app->add_option("--th-tol", o.th_tol, "standardized tolerance for tolerance mode")->capture_default_str();
}

void add_output(CLI::App* app, OutputOptions& o) {
  app->add_option("--output,-o", o.output, "output path (default: standard output)");
  app->add_flag("--force", o.force, "overwrite an existing output instead of writing a timestamped copy");
}

ccg::PipelineConfig make_config(const PipelineOptions& o) {
  ccg::PipelineConfig c;
  c.metric = ccg::parse_metric(o.metric);
  c.kernel.kind = ccg::parse_kernel(o.kernel);
  c.bandwidth = o.bandwidth;
  c.bandwidth_scale = o.bandwidth_scale;
  c.S = o.S;
  c.J = o.J;
  c.alpha = o.alpha;
  c.ridge = o.ridge;
  c.rcond_threshold = o.rcond_threshold;
  c.min_cell = o.min_cell;
  c.placebo_permutations = o.permutations;
  c.seed = o.seed;
  c.th.mode = ccg::parse_th_mode(o.th_mode);
  c.th.alpha = o.th_alpha;
  c.th.tol = o.th_tol;
  return c;
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ccg::Error(ccg::ErrorKind::ConfigError, std::string(what) + " not found: " + path, {{"path", path}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ccg::PanelDataset load(const InputOptions& o) {
  std::ifstream in(o.input);
  if (!in) throw ccg::Error(ccg::ErrorKind::ConfigError, "input file not found: " + o.input, {{"path", o.input}});
  std::optional<ccg::GroupMetadata> meta;
  if (!o.sidecar.empty()) meta = ccg::GroupMetadata::from_json_text(read_file(o.sidecar, "sidecar"));
  return ccg::load_panel(in, o.schema, meta);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  return out;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

// Existing files are never replaced without --force; the new content goes
// next to them under a timestamped name.
fs::path resolve_output(const fs::path& wanted, bool force) {
  if (force || !fs::exists(wanted)) return wanted;
  const std::string stem = wanted.stem().string(), ext = wanted.extension().string(), ts = timestamp();
  fs::path p = wanted.parent_path() / (stem + "." + ts + ext);
  for (int k = 1; fs::exists(p); ++k) p = wanted.parent_path() / (stem + "." + ts + "-" + std::to_string(k) + ext);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ccg::Error(ccg::ErrorKind::ConfigError, "cannot write " + path.string());
  out << text;
}

void emit(const OutputOptions& o, const std::string& text) {
  if (o.output.empty()) {
    std::cout << text;
    return;
  }
  const fs::path p = resolve_output(o.output, o.force);
  write_text(p, text);
  if (p != fs::path(o.output)) std::cerr << "note: " << o.output << " exists; wrote " << p.string() << '\n';
}

json stamp(json report, const std::string& command, const json& effective, std::uint64_t seed) {
  report["command"] = command;
  report["config"] = effective;
  report["config_hash"] = ccg::config_hash(effective);
  report["seed"] = seed;
  return report;
}

json input_json(const InputOptions& o) {
  return {{"input", o.input},
          {"sidecar", o.sidecar},
          {"schema",
           {{"unit", o.schema.unit},
            {"group", o.schema.group},
            {"time", o.schema.time},
            {"outcome", o.schema.outcome},
            {"treated", o.schema.treated},
            {"covariate", o.schema.covariate},
            {"staggered", o.schema.allow_staggered}}}};
}

ccg::DgpSpec load_spec(const std::string& preset, const std::string& spec_file) {
  if (!preset.empty() && !spec_file.empty())
    throw ccg::Error(ccg::ErrorKind::ConfigError, "give either --preset or --spec, not both");
  if (!preset.empty()) return ccg::preset(preset);
  if (spec_file.empty()) throw ccg::Error(ccg::ErrorKind::ConfigError, "a --preset or --spec file is required");
  json j;
  try {
    j = json::parse(read_file(spec_file, "spec file"));
  } catch (const json::parse_error& e) {
    throw ccg::Error(ccg::ErrorKind::InvalidSpec, std::string("spec file is not valid JSON: ") + e.what());
  }
  return ccg::dgp_from_json(j);
}

// CLI11 only reads --config on the top-level app, so the file is expanded
// into arguments placed right after the subcommand name. Options already on
// the command line keep their value.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  std::size_t at = 0;
  const CLI::App* sub = nullptr;
  for (; at < args.size(); ++at)
    if ((sub = app.get_subcommand_no_throw(args[at]))) break;
  if (!sub) return args;

  std::string path;
  for (std::size_t i = at + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;

  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(path);
  } catch (const CLI::Error& e) {
    throw ccg::Error(ccg::ErrorKind::ConfigError, "cannot read config file " + path + ": " + e.what());
  }

  auto on_command_line = [&](const CLI::Option* opt) {
    for (std::size_t i = at + 1; i < args.size(); ++i) {
      for (const auto& l : opt->get_lnames())
        if (args[i] == "--" + l || args[i].rfind("--" + l + "=", 0) == 0) return true;
      for (const auto& s : opt->get_snames())
        if (args[i].rfind("-" + s, 0) == 0) return true;
    }
    return false;
  };

  std::vector<std::string> extra;
  for (const auto& item : items) {
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub->get_name())) continue;
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt || key == "config")
      throw ccg::Error(ccg::ErrorKind::ConfigError, "unknown key '" + item.name + "' in " + path,
                       {{"subcommand", sub->get_name()}});
    if (on_command_line(opt)) continue;
    if (opt->get_expected_max() == 0) {
      if (!item.inputs.empty() && (item.inputs[0] == "true" || item.inputs[0] == "1")) extra.push_back("--" + key);
      continue;
    }
    extra.push_back("--" + key);
    extra.insert(extra.end(), item.inputs.begin(), item.inputs.end());
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(at) + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Close comparison group estimation for panel data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ccg 1.0.0");

  InputOptions in;
  PipelineOptions po;
  OutputOptions out;

  std::string config_file;
  auto configurable = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "TOML-style key = value file; command-line flags take precedence");
  };

  // validate
  auto* validate = app.add_subcommand("validate", "check a panel CSV against the data invariants");
  add_input(validate, in);
  add_output(validate, out);
  configurable(validate);

  // distances / select
  bool jackknife = false;
  auto* distances = app.add_subcommand("distances", "distance of every comparison group to the treated group");
  add_input(distances, in);
  add_pipeline(distances, po);
  add_output(distances, out);
  distances->add_flag("--jackknife", jackknife, "add delete-one jackknife standard errors");
  configurable(distances);

  auto* select = app.add_subcommand("select", "kernel selection of close comparison groups");
  add_input(select, in);
  add_pipeline(select, po);
  add_output(select, out);
  configurable(select);

  // estimate
  std::string estimands = "att";
  int period = 0;
  auto* estimate = app.add_subcommand("estimate", "ATT with estimated close comparison groups");
  add_input(estimate, in);
  add_pipeline(estimate, po);
  add_output(estimate, out);
  estimate->add_option("--estimands", estimands, "comma list of att, tau_mr, tau_th, placebo, conditional, group_time")
      ->capture_default_str();
  estimate->add_option("--period", period, "post period for att / tau_th / placebo (default t*; tau_th: detected)");
  configurable(estimate);

  // placebo
  auto* placebo = app.add_subcommand("placebo", "equality test of post-period means across selected groups");
  add_input(placebo, in);
  add_pipeline(placebo, po);
  add_output(placebo, out);
  placebo->add_option("--period", period, "post period to test (default t*)");
  configurable(placebo);

  // timehomog
  std::size_t basis = 0;
  auto* timehomog = app.add_subcommand("timehomog", "detect mean time homogeneity among comparison groups");
  add_input(timehomog, in);
  add_pipeline(timehomog, po);
  add_output(timehomog, out);
  timehomog->add_option("--transfer-basis", basis, "size m of the polynomial basis for the transfer check (0 = skip)");
  timehomog->add_option("--period", period, "post period of the transfer check (default t*)");
  configurable(timehomog);

  // simulate
  std::string preset_name, spec_file;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::size_t> n_per_group;
  unsigned threads = 1;
  bool list_presets = false;
  auto* simulate = app.add_subcommand("simulate", "generate a panel CSV and its truth.json from a preset or spec");
  simulate->add_option("--preset", preset_name, "named preset");
  simulate->add_option("--spec", spec_file, "JSON spec file");
  simulate->add_option("--seed", sim_seed, "override the spec seed");
  simulate->add_option("--n-per-group", n_per_group, "override the group size");
  simulate->add_option("--threads", threads, "generation threads (output does not depend on it)")
      ->capture_default_str();
  simulate->add_flag("--list-presets", list_presets, "print preset names and exit");
  add_output(simulate, out);
  configurable(simulate);

  // montecarlo
  std::string mc_estimands = "att,oracle", mc_groups, table;
  std::size_t reps = 2000;
  std::uint64_t master_seed = 0;
  unsigned mc_threads = 0;
  double budget = 0.05;
  bool keep = false;
  auto* montecarlo = app.add_subcommand("montecarlo", "replicate a preset or spec and summarize the estimators");
  montecarlo->add_option("--preset", preset_name, "named preset");
  montecarlo->add_option("--spec", spec_file, "JSON spec file");
  montecarlo->add_option("--table", table, "reproduce a robustness table: prop1 | prop2 | prop3");
  montecarlo->add_option("--reps", reps, "replications")->capture_default_str();
  montecarlo->add_option("--master-seed", master_seed, "master seed")->capture_default_str();
  montecarlo->add_option("--threads", mc_threads, "worker threads (0 = all cores)")->capture_default_str();
  montecarlo->add_option("--n-per-group", n_per_group, "override the group size");
  montecarlo->add_option("--estimands", mc_estimands, "comma list of att, oracle, tau_mr, tau_th, placebo")
      ->capture_default_str();
  montecarlo->add_option("--groups", mc_groups, "declared comparison groups (comma list) instead of selection");
  montecarlo->add_option("--period", period, "post period (default t*)");
  montecarlo->add_option("--failure-budget", budget, "tolerated fraction of failed estimates")->capture_default_str();
  montecarlo->add_flag("--per-rep", keep, "keep every replication's estimate in the summary");
  add_pipeline(montecarlo, po);
  add_output(montecarlo, out);
  configurable(montecarlo);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
      args = expand_config(app, std::move(args));
    } catch (const ccg::Error& e) {
      std::cerr << e.to_json().dump(2) << '\n';
      return ccg::exit_code(e.kind());
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) {
      json report;
      try {
        const ccg::PanelDataset data = load(in);
        report = {{"valid", true},
                  {"units", data.units()},
                  {"groups", data.groups().size()},
                  {"periods", data.periods()},
                  {"t_star", data.t_star()},
                  {"treated_group", data.treated_label()},
                  {"staggered", data.staggered()},
                  {"violations", json::array()}};
      } catch (const ccg::Error& e) {
        if (ccg::exit_code(e.kind()) != 1) throw;
        report = {{"valid", false}, {"violations", json::array({e.to_json()})}};
        emit(out, stamp(report, "validate", input_json(in), 0).dump(2) + "\n");
        return 1;
      }
      emit(out, stamp(report, "validate", input_json(in), 0).dump(2) + "\n");
      return 0;
    }

    if (simulate->parsed()) {
      if (list_presets) {
        for (const auto& n : ccg::preset_names()) std::cout << n << '\n';
        return 0;
      }
      ccg::DgpSpec spec = load_spec(preset_name, spec_file);
      if (sim_seed) spec.seed = *sim_seed;
      if (n_per_group) {
        spec.n_per_group = *n_per_group;
        for (auto& g : spec.groups) g.n = 0;
      }
      const ccg::Generated gen = ccg::generate(spec, threads);
      std::ostringstream csv;
      ccg::write_panel_csv(csv, gen.data);
      json truth = ccg::to_json(gen.truth);
      truth["spec"] = ccg::to_json(spec);
      truth["seed"] = spec.seed;
      truth["config_hash"] = ccg::config_hash(truth["spec"]);
      if (out.output.empty()) {
        std::cout << csv.str();
        std::cerr << truth.dump(2) << '\n';
        return 0;
      }
      const fs::path data_path = resolve_output(out.output, out.force);
      fs::path truth_path = data_path;
      truth_path.replace_extension(".truth.json");
      write_text(data_path, csv.str());
      write_text(truth_path, truth.dump(2) + "\n");
      std::cerr << "wrote " << data_path.string() << " and " << truth_path.string() << '\n';
      return 0;
    }

    const ccg::PipelineConfig config = make_config(po);
    json effective = input_json(in);
    effective["pipeline"] = ccg::to_json(config);

    if (montecarlo->parsed()) {
      json mc_effective = {{"pipeline", ccg::to_json(config)}, {"reps", reps}, {"master_seed", master_seed},
                           {"n_per_group", n_per_group ? json(*n_per_group) : json(nullptr)}};
      if (!table.empty()) {
        ccg::TableOptions topts{reps, master_seed, mc_threads, n_per_group};
        const ccg::RobustnessTable t = ccg::robustness_table(table, topts);
        const std::string md = ccg::render_markdown(t);
        mc_effective["table"] = table;
        json report = stamp(ccg::to_json(t), "montecarlo", mc_effective, master_seed);
        report["markdown"] = md;
        if (out.output.empty()) {
          std::cout << md;
        } else {
          emit(out, report.dump(2) + "\n");
          std::cout << md;
        }
        return 0;
      }
      const ccg::DgpSpec spec = load_spec(preset_name, spec_file);
      std::vector<ccg::EstimandSpec> es;
      for (const auto& name : split_list(mc_estimands))
        es.push_back({name, ccg::parse_estimand_kind(name), split_list(mc_groups), period});
      ccg::McOptions mo;
      mo.reps = reps;
      mo.master_seed = master_seed;
      mo.threads = mc_threads;
      mo.failure_budget = budget;
      mo.keep_per_rep = keep;
      mo.n_per_group = n_per_group;
      const ccg::McSummary s = ccg::run_mc(spec, config, es, mo);
      mc_effective["spec"] = ccg::to_json(spec);
      mc_effective["estimands"] = mc_estimands;
      mc_effective["groups"] = mc_groups;
      emit(out, stamp(ccg::to_json(s), "montecarlo", mc_effective, master_seed).dump(2) + "\n");
      return 0;
    }

    const ccg::PanelDataset data = load(in);

    if (distances->parsed()) {
      const ccg::Design design = ccg::default_design(data);
      json list = json::array();
      for (auto d : ccg::compute_distances(data, design, config)) {
        if (jackknife)
          d.se_proxy = ccg::jackknife_distance_se(data, design.treated, data.group_index(d.group), design.t_star,
                                                  config.metric, config);
        list.push_back(ccg::to_json(d));
      }
      json report = {{"treated_group", data.treated_label()}, {"t_star", data.t_star()}, {"distances", list}};
      effective["jackknife"] = jackknife;
      emit(out, stamp(report, "distances", effective, config.seed).dump(2) + "\n");
      return 0;
    }

    if (select->parsed()) {
      const ccg::SelectionResult s = ccg::run_selection(data, config);
      emit(out, stamp({{"selection", ccg::to_json(s)}}, "select", effective, config.seed).dump(2) + "\n");
      return 0;
    }

    if (placebo->parsed()) {
      const ccg::SelectionResult s = ccg::run_selection(data, config);
      const int t = period ? period : data.t_star();
      const ccg::PlaceboReport p =
          ccg::placebo_test(data, s, t, {config.placebo_permutations, config.seed});
      effective["period"] = t;
      emit(out, stamp({{"selection", ccg::to_json(s)}, {"placebo", ccg::to_json(p)}}, "placebo", effective,
                      config.seed)
                    .dump(2) +
                    "\n");
      return 0;
    }

    if (timehomog->parsed()) {
      json report = {{"time_homogeneity", ccg::to_json(ccg::detect_time_homogeneity(data, config.th))}};
      if (basis > 0) {
        ccg::TransferOptions topts;
        topts.period = period;
        report["transfer_check"] = ccg::to_json(ccg::lou_parametric_transfer_check(data, ccg::default_basis(basis), topts));
      }
      effective["transfer_basis"] = basis;
      emit(out, stamp(report, "timehomog", effective, config.seed).dump(2) + "\n");
      return 0;
    }

    if (estimate->parsed()) {
      const auto wanted = split_list(estimands);
      auto want = [&](const char* k) { return std::find(wanted.begin(), wanted.end(), k) != wanted.end(); };
      for (const auto& w : wanted)
        if (w != "att" && w != "tau_mr" && w != "tau_th" && w != "placebo" && w != "conditional" && w != "group_time")
          throw ccg::Error(ccg::ErrorKind::ConfigError, "unknown estimand '" + w + "'");
      json report = json::object();
      json warnings = json::array();
      const ccg::EstimateOptions eopts{config.alpha, false};
      const bool needs_selection = want("att") || want("tau_mr") || want("placebo");
      std::optional<ccg::SelectionResult> sel;
      if (needs_selection) {
        sel = ccg::run_selection(data, config);
        report["selection"] = ccg::to_json(*sel);
        if (sel->selected.size() == 1)
          warnings.push_back("only one close comparison group was selected; the placebo test is unavailable");
      }
      if (want("att")) report["att"] = ccg::to_json(ccg::att_estimate(data, *sel, period ? period : data.t_star(), eopts));
      if (want("tau_mr")) report["tau_mr"] = ccg::to_json(ccg::multiply_robust_att(data, *sel, eopts));
      if (want("placebo")) {
        if (sel->selected.size() >= 2)
          report["placebo"] =
              ccg::to_json(ccg::placebo_test(data, *sel, period ? period : data.t_star(),
                                             {config.placebo_permutations, config.seed}));
        else
          report["placebo"] = {{"available", false}, {"reason", "fewer than two selected groups"}};
      }
      if (want("tau_th")) {
        json block;
        int t = period;
        if (t == 0) {
          const ccg::TimeHomogReport th = ccg::detect_time_homogeneity(data, config.th);
          block["time_homogeneity"] = ccg::to_json(th);
          t = th.t_th_mean;
        }
        if (t > 0) {
          block["estimate"] = ccg::to_json(ccg::tau_th(data, t, eopts));
        } else {
          block["available"] = false;
          warnings.push_back("no post period passes the time homogeneity check; tau_th not reported");
        }
        report["tau_th"] = block;
      }
      if (want("conditional")) report["conditional"] = ccg::to_json(ccg::att_conditional(data, config, period));
      if (want("group_time")) report["group_time"] = ccg::to_json(ccg::att_group_time(data, config));
      report["warnings"] = warnings;
      for (const auto& w : warnings) std::cerr << "warning: " << w.get<std::string>() << '\n';
      effective["estimands"] = estimands;
      effective["period"] = period;
      emit(out, stamp(report, "estimate", effective, config.seed).dump(2) + "\n");
      return 0;
    }
  } catch (const ccg::Error& e) {
    std::cerr << e.to_json().dump(2) << '\n';
    return ccg::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "InternalError"}, {"message", e.what()}}.dump(2) << '\n';
    return 3;
  }
  return 0;
}
