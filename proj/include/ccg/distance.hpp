#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ccg/config.hpp"
#include "ccg/panel.hpp"

namespace ccg {

struct DistanceReport {
  std::string group;
  Metric metric = Metric::wasserstein;
  double d_hat = 0.0;
  // d_hat = numerator / scale. For the mean metric the numerator is the
  // Euclidean norm of the mean gap and scale is the implied pooled spread
  // along that direction.
  double numerator = 0.0;
  double scale = 0.0;
  double rcond = 1.0;  // pooled covariance conditioning (mean metric only)
  std::optional<double> se_proxy;
};

DistanceReport wasserstein_distance(const GroupProfile& p1, const GroupProfile& pg);

struct MeanDistanceOptions {
  bool ridge = false;
  double rcond_threshold = 1e-10;
};
DistanceReport mean_distance(const GroupProfile& p1, const GroupProfile& pg, const MeanDistanceOptions& opts = {});

DistanceReport distance(const GroupProfile& p1, const GroupProfile& pg, const PipelineConfig& config);

// Delete-one-unit jackknife standard error of d_hat(group) against the
// dataset's treated group. Diagnostic only.
double jackknife_distance_se(const PanelDataset& data, std::string_view group, Metric metric,
                             const PipelineConfig& config);
double jackknife_distance_se(const PanelDataset& data, std::size_t treated, std::size_t group, int t_star,
                             Metric metric, const PipelineConfig& config);

}  // namespace ccg
