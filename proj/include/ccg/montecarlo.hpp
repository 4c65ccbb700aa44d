#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccg/config.hpp"
#include "ccg/dgp.hpp"

namespace ccg {

enum class EstimandKind { att, oracle, tau_mr, tau_th, placebo };

std::string_view to_string(EstimandKind k);
EstimandKind parse_estimand_kind(std::string_view s);

// One quantity tracked across replications. `groups` fixes the comparison
// set; when empty, att and tau_mr use the estimated selection and oracle uses
// the true set. `period` 0 means t*.
struct EstimandSpec {
  std::string name;
  EstimandKind kind = EstimandKind::att;
  std::vector<std::string> groups;
  int period = 0;
};

struct McOptions {
  std::size_t reps = 2000;
  std::uint64_t master_seed = 0;
  unsigned threads = 0;             // 0 = hardware concurrency
  double failure_budget = 0.05;     // tolerated fraction of failed estimates
  bool keep_per_rep = false;
  std::optional<std::size_t> n_per_group;
};

struct EstimandSummary {
  EstimandSpec spec;
  double att_true = 0.0;
  double estimand_value = 0.0;  // population value of the estimand; NaN when unknown
  double analytic_bias = 0.0;   // estimand_value - att_true
  std::size_t ok = 0;
  std::size_t failed = 0;
  double mean_estimate = 0.0;
  double bias = 0.0;            // mean_estimate - att_true
  double sd_estimate = 0.0;
  double mc_se = 0.0;           // sd_estimate / sqrt(ok)
  double rmse = 0.0;
  double coverage = 0.0;        // CI covers att_true
  double mean_variance = 0.0;   // average plug-in V-hat
  double mean_std_error = 0.0;
  std::vector<double> per_rep;  // NaN for failed reps; empty unless kept

  bool unbiased() const;        // |bias| < 3 mc_se
};

struct McFailure {
  std::size_t rep = 0;
  std::string estimand;
  std::string kind;
  std::string message;
};

struct McSummary {
  DgpSpec spec;
  PipelineConfig config;
  std::size_t reps = 0;
  std::uint64_t master_seed = 0;
  std::size_t n_per_group = 0;
  std::optional<double> selection_exact_rate;  // present when selection ran
  double mean_selected = 0.0;
  std::vector<std::string> gstar_true;
  std::vector<EstimandSummary> estimands;
  std::vector<McFailure> failures;

  const EstimandSummary& at(std::string_view name) const;
};

// Replication r uses seed derive_seed(master_seed, r). Results are reduced in
// replication order, so the summary does not depend on the thread count.
McSummary run_mc(const DgpSpec& spec, const PipelineConfig& config, const std::vector<EstimandSpec>& estimands,
                 const McOptions& opts);

// Default estimands: att on the estimated selection and the oracle.
std::vector<EstimandSpec> default_estimands(const DgpSpec& spec);

// ---- robustness tables ----------------------------------------------------

struct TableCell {
  std::string column;
  std::string preset;
  std::string estimand;
  bool expected_unbiased = true;
  EstimandSummary summary;
  bool observed_unbiased = false;
};

struct TableRow {
  std::string strategy;
  std::vector<TableCell> cells;
};

struct RobustnessTable {
  std::string name;  // prop1 | prop2 | prop3
  std::vector<std::string> columns;
  std::vector<TableRow> rows;

  bool matches_expected() const;
};

std::vector<std::string> table_names();

struct TableOptions {
  std::size_t reps = 2000;
  std::uint64_t master_seed = 0;
  unsigned threads = 0;
  std::optional<std::size_t> n_per_group;
};

// Raises MissingPresetForCell when a cell has no preset or its preset lacks
// the declared comparison group.
RobustnessTable robustness_table(const std::string& name, const TableOptions& opts);

// Markdown rendering: check marks for unbiased cells, crosses with the
// measured bias otherwise.
std::string render_markdown(const RobustnessTable& table);

}  // namespace ccg
