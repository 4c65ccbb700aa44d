#include "ccg/pipeline.hpp"

#include <algorithm>

#include "ccg/error.hpp"

namespace ccg {

Design default_design(const PanelDataset& data) {
  Design d;
  d.treated = data.treated_group();
  d.t_star = data.t_star();
  d.candidates = data.comparison_groups();
  return d;
}

std::vector<DistanceReport> compute_distances(const PanelDataset& data, const Design& design,
                                              const PipelineConfig& config) {
  if (design.candidates.empty()) throw Error(ErrorKind::NoComparisonGroups, "no candidate comparison groups");
  const GroupProfile p1 = profile_group(data, design.treated, design.t_star, config.S, config.J);
  std::vector<DistanceReport> out;
  out.reserve(design.candidates.size());
  for (std::size_t g : design.candidates)
    out.push_back(distance(p1, profile_group(data, g, design.t_star, config.S, config.J), config));
  return out;
}

double resolve_bandwidth(const PanelDataset& data, const Design& design, const PipelineConfig& config) {
  if (config.bandwidth) return *config.bandwidth;
  std::size_t n_min = data.group(design.treated).size();
  for (std::size_t g : design.candidates) n_min = std::min(n_min, data.group(g).size());
  return default_bandwidth(n_min, config.bandwidth_scale);
}

SelectionResult run_selection(const PanelDataset& data, const Design& design, const PipelineConfig& config) {
  const auto distances = compute_distances(data, design, config);
  std::vector<std::pair<std::string, double>> shares;
  for (std::size_t g : design.candidates)
    shares.emplace_back(data.group(g).label,
                        static_cast<double>(data.group(g).size()) / static_cast<double>(data.units()));
  SelectionResult r = select_groups(distances, shares, config.kernel, resolve_bandwidth(data, design, config),
                                    data.group(design.treated).label);
  r.t_star = design.t_star;
  return r;
}

SelectionResult run_selection(const PanelDataset& data, const PipelineConfig& config) {
  return run_selection(data, default_design(data), config);
}

SelectionResult declared_selection(const PanelDataset& data, std::span<const std::string> labels) {
  if (labels.empty()) throw Error(ErrorKind::EmptySelection, "declared comparison set is empty");
  SelectionResult r;
  r.treated_group = data.group(data.treated_group()).label;
  r.t_star = data.t_star();
  double total = 0.0;
  for (const auto& label : labels) {
    const GroupInfo& g = data.group(data.group_index(label));
    if (g.ever_treated()) throw Error(ErrorKind::ConfigError, "declared set contains treated group '" + label + "'");
    DistanceReport d;
    d.group = label;
    r.distances.push_back(d);
    r.weights.push_back(static_cast<double>(g.size()));
    r.selected.push_back(label);
    total += r.weights.back();
  }
  for (double& w : r.weights) w /= total;
  return r;
}

}  // namespace ccg
