#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ccg {

enum class Metric { wasserstein, mean };
enum class KernelKind { uniform, epanechnikov, triangular };
enum class ThMode { test, tolerance };

std::string_view to_string(Metric m);
std::string_view to_string(KernelKind k);
std::string_view to_string(ThMode m);
Metric parse_metric(std::string_view s);
KernelKind parse_kernel(std::string_view s);
ThMode parse_th_mode(std::string_view s);

struct KernelSpec {
  KernelKind kind = KernelKind::uniform;
};

struct TimeHomogConfig {
  ThMode mode = ThMode::test;
  double alpha = 0.05;
  double tol = 0.1;
};

// Settings for profile -> distance -> selection -> estimate.
struct PipelineConfig {
  Metric metric = Metric::wasserstein;
  KernelSpec kernel;
  std::optional<double> bandwidth;  // empty = automatic rule
  double bandwidth_scale = 0.5;
  int S = 1;
  int J = 99;
  double alpha = 0.05;
  bool ridge = false;
  double rcond_threshold = 1e-10;
  std::size_t min_cell = 10;
  std::size_t placebo_permutations = 0;
  std::uint64_t seed = 0;
  TimeHomogConfig th;
};

}  // namespace ccg
