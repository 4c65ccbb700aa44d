#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccg/config.hpp"
#include "ccg/panel.hpp"
#include "ccg/pipeline.hpp"
#include "ccg/selection.hpp"

namespace ccg {

struct AttEstimate {
  double att_hat = 0.0;
  double variance = 0.0;   // V-hat, the mean of squared influence values
  double std_error = 0.0;  // sqrt(V-hat / n)
  std::pair<double, double> ci{0.0, 0.0};
  double alpha = 0.05;
  int period = 0;
  int base_period = 0;  // 0 unless the estimate is a before/after contrast
  std::size_t n = 0;
  std::size_t n_1 = 0;
  std::size_t n_selected = 0;
  std::optional<SelectionResult> selection;
  std::vector<double> influence_values;  // per dataset unit; empty unless retained
};

// Set CI and standard error from att_hat, variance and n.
void finalize_inference(AttEstimate& e);

struct EstimateOptions {
  double alpha = 0.05;
  bool keep_influence = false;
};

AttEstimate att_estimate(const PanelDataset& data, const SelectionResult& selection, int t,
                         const EstimateOptions& opts = {});

AttEstimate oracle_att(const PanelDataset& data, std::span<const std::string> true_gstar, int t,
                       const EstimateOptions& opts = {});

AttEstimate multiply_robust_att(const PanelDataset& data, const SelectionResult& selection,
                                const EstimateOptions& opts = {});

struct PlaceboReport {
  int period = 0;
  std::vector<std::pair<std::string, double>> group_means;
  double wald_stat = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::optional<double> permutation_p_value;
  std::size_t permutations = 0;
};

struct PlaceboOptions {
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
};

PlaceboReport placebo_test(const PanelDataset& data, const SelectionResult& selection, int t,
                           const PlaceboOptions& opts = {});

struct ConditionalCell {
  std::string level;
  std::size_t n_treated = 0;
  bool trimmed = false;
  std::string reason;
  std::optional<AttEstimate> estimate;
};

struct ConditionalResult {
  std::vector<ConditionalCell> cells;
  AttEstimate aggregate;  // selection unset
};

ConditionalResult att_conditional(const PanelDataset& data, const PipelineConfig& config, int t = 0);

struct GroupTimeCell {
  std::string group;
  int first_treated = 0;
  int period = 0;
  std::optional<AttEstimate> estimate;  // influence values retained
  std::string skipped_reason;
};

struct AggregateEstimate {
  double att = 0.0;
  double std_error = 0.0;
  std::pair<double, double> ci{0.0, 0.0};
  std::size_t cells = 0;
};

struct GroupTimeResult {
  std::vector<GroupTimeCell> cells;
  std::map<int, AggregateEstimate> event_study;  // keyed by e = t - t*_g
  AggregateEstimate overall;
};

GroupTimeResult att_group_time(const PanelDataset& data, const PipelineConfig& config);

namespace detail {

// Contrast of the treated group with a weighted set of groups at period t,
// optionally differenced against base_period. Variance uses the pooled
// sample of `groups` as in the plug-in influence function.
AttEstimate weighted_contrast(const PanelDataset& data, std::size_t treated, std::span<const std::size_t> groups,
                              std::span<const double> weights, int t, int base_period, const EstimateOptions& opts);

}  // namespace detail

}  // namespace ccg
