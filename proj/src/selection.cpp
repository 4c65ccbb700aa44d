#include "ccg/selection.hpp"

#include <algorithm>
#include <cmath>

#include "ccg/error.hpp"

namespace ccg {

double kernel_eval(KernelSpec spec, double u) {
  const double a = std::abs(u);
  if (!(a <= 1.0)) return 0.0;
  switch (spec.kind) {
    case KernelKind::uniform: return 1.0;
    case KernelKind::epanechnikov: return 0.75 * (1.0 - u * u);
    case KernelKind::triangular: return 1.0 - a;
  }
  return 0.0;
}

double default_bandwidth(std::size_t n_min, double c) {
  if (n_min < 1) throw Error(ErrorKind::ConfigError, "bandwidth rule needs n_min >= 1");
  if (!(c > 0.0)) throw Error(ErrorKind::ConfigError, "bandwidth scale must be positive");
  return c * std::pow(static_cast<double>(n_min), -1.0 / 6.0);
}

double SelectionResult::weight(std::string_view group) const {
  for (std::size_t k = 0; k < distances.size(); ++k)
    if (distances[k].group == group) return weights[k];
  return 0.0;
}

bool SelectionResult::is_selected(std::string_view group) const {
  return std::find(selected.begin(), selected.end(), group) != selected.end();
}

SelectionResult select_groups(std::span<const DistanceReport> distances,
                              std::span<const std::pair<std::string, double>> p_hats, KernelSpec kernel, double h,
                              std::string_view treated_group) {
  if (!(h > 0.0)) throw Error(ErrorKind::ConfigError, "bandwidth must be positive");
  SelectionResult r;
  r.bandwidth = h;
  r.kernel = kernel;
  r.treated_group = std::string(treated_group);
  if (!distances.empty()) r.metric = distances.front().metric;

  auto share = [&](const std::string& g) {
    for (const auto& [label, p] : p_hats)
      if (label == g) return p;
    throw Error(ErrorKind::ConfigError, "no sample share for group '" + g + "'");
  };

  double total = 0.0;
  for (const DistanceReport& d : distances) {
    if (!treated_group.empty() && d.group == treated_group) continue;
    const double w = kernel_eval(kernel, d.d_hat / h) * share(d.group);
    r.distances.push_back(d);
    r.weights.push_back(w);
    total += w;
  }

  if (!(total > 0.0)) {
    std::vector<const DistanceReport*> order;
    for (const auto& d : r.distances) order.push_back(&d);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->d_hat < b->d_hat; });
    nlohmann::json nearest = nlohmann::json::array();
    for (std::size_t k = 0; k < std::min<std::size_t>(3, order.size()); ++k)
      nearest.push_back({{"group", order[k]->group}, {"d_hat", order[k]->d_hat}});
    nlohmann::json detail = {{"bandwidth", h}, {"kernel", std::string(to_string(kernel.kind))}, {"nearest", nearest}};
    if (!order.empty()) {
      detail["min_admitting_bandwidth"] = order.front()->d_hat;
      detail["strict"] = kernel.kind != KernelKind::uniform;
    }
    throw Error(ErrorKind::NoCloseComparisonGroups, "no comparison group lies within the kernel support", detail);
  }

  for (std::size_t k = 0; k < r.weights.size(); ++k) {
    r.weights[k] /= total;
    if (r.weights[k] > 0.0) r.selected.push_back(r.distances[k].group);
  }
  return r;
}

}  // namespace ccg
