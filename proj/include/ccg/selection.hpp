#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccg/config.hpp"
#include "ccg/distance.hpp"

namespace ccg {

double kernel_eval(KernelSpec spec, double u);

// h = c * n_min^(-1/6)
double default_bandwidth(std::size_t n_min, double c = 0.5);

struct SelectionResult {
  double bandwidth = 0.0;
  Metric metric = Metric::wasserstein;
  KernelSpec kernel;
  std::vector<DistanceReport> distances;
  std::vector<double> weights;  // aligned with distances
  std::vector<std::string> selected;
  bool treated_excluded = true;
  std::string treated_group;
  int t_star = 0;

  double weight(std::string_view group) const;
  bool is_selected(std::string_view group) const;
};

// p_hats pairs a group label with its sample share.
SelectionResult select_groups(std::span<const DistanceReport> distances,
                              std::span<const std::pair<std::string, double>> p_hats, KernelSpec kernel, double h,
                              std::string_view treated_group = {});

}  // namespace ccg
