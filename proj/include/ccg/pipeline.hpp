#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ccg/config.hpp"
#include "ccg/distance.hpp"
#include "ccg/panel.hpp"
#include "ccg/selection.hpp"

namespace ccg {

// Which group plays "treated", when it starts, and who may be compared to it.
struct Design {
  std::size_t treated = 0;
  int t_star = 0;
  std::vector<std::size_t> candidates;
};

Design default_design(const PanelDataset& data);

std::vector<DistanceReport> compute_distances(const PanelDataset& data, const Design& design,
                                              const PipelineConfig& config);

// Bandwidth from config: the fixed value if set, otherwise the n_min rule
// over the treated group and the candidates.
double resolve_bandwidth(const PanelDataset& data, const Design& design, const PipelineConfig& config);

SelectionResult run_selection(const PanelDataset& data, const Design& design, const PipelineConfig& config);
SelectionResult run_selection(const PanelDataset& data, const PipelineConfig& config);

// A selection fixed in advance: the listed groups with weights proportional
// to their sizes and no distance information.
SelectionResult declared_selection(const PanelDataset& data, std::span<const std::string> labels);

}  // namespace ccg
