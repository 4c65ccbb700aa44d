#pragma once
// Small builders shared by the unit tests.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ccg/dgp.hpp"
#include "ccg/panel.hpp"

namespace ccg::testing {

// groups[g][unit][t-1]; the group at `treated` starts treatment at t_star.
inline PanelDataset make_panel(const std::vector<std::vector<std::vector<double>>>& groups, std::size_t treated,
                               int t_star) {
  PanelParts parts;
  parts.T = static_cast<int>(groups.front().front().size());
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size();
  parts.outcomes.assign(n * static_cast<std::size_t>(parts.T), 0.0);
  std::size_t i = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    GroupInfo gi;
    gi.label = g == treated ? "treated" : "g" + std::to_string(g);
    gi.begin = i;
    gi.first_treated = g == treated ? t_star : 0;
    for (const auto& unit : groups[g]) {
      parts.unit_ids.push_back(gi.label + "-" + std::to_string(i));
      for (int t = 1; t <= parts.T; ++t) parts.outcomes[static_cast<std::size_t>(t - 1) * n + i] = unit[t - 1];
      ++i;
    }
    gi.end = i;
    parts.groups.push_back(gi);
  }
  return PanelDataset(std::move(parts));
}

// Two-period additive model with no idiosyncratic noise, so Y_1 follows the
// group's eta law exactly. The first law is the treated group.
inline DgpSpec level_spec(const std::vector<Law>& etas, std::size_t n, std::uint64_t seed, double att = 0.0) {
  DgpSpec s;
  s.name = "levels";
  s.strategy = Strategy::did;
  s.n_per_group = n;
  s.T = 2;
  s.t_star = 2;
  s.S = 1;
  s.att = att;
  s.seed = seed;
  s.noise_sd = 0.0;
  s.theta = {0.0, 0.0};
  for (std::size_t g = 0; g < etas.size(); ++g) {
    GroupParams p;
    p.label = g == 0 ? "treated" : "g" + std::to_string(g);
    p.first_treated = g == 0 ? 2 : 0;
    p.eta = etas[g];
    s.groups.push_back(p);
  }
  return s;
}

}  // namespace ccg::testing
