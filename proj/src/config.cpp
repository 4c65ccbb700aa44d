#include "ccg/config.hpp"

#include <string>

#include "ccg/error.hpp"

namespace ccg {

std::string_view to_string(Metric m) { return m == Metric::mean ? "mean" : "wasserstein"; }

std::string_view to_string(KernelKind k) {
  switch (k) {
    case KernelKind::uniform: return "uniform";
    case KernelKind::epanechnikov: return "epanechnikov";
    case KernelKind::triangular: return "triangular";
  }
  return "uniform";
}

std::string_view to_string(ThMode m) { return m == ThMode::test ? "test" : "tolerance"; }

Metric parse_metric(std::string_view s) {
  if (s == "wasserstein") return Metric::wasserstein;
  if (s == "mean") return Metric::mean;
  throw Error(ErrorKind::ConfigError, "metric must be wasserstein or mean, got '" + std::string(s) + "'");
}

KernelKind parse_kernel(std::string_view s) {
  if (s == "uniform") return KernelKind::uniform;
  if (s == "epanechnikov") return KernelKind::epanechnikov;
  if (s == "triangular") return KernelKind::triangular;
  throw Error(ErrorKind::ConfigError, "unknown kernel '" + std::string(s) + "'");
}

ThMode parse_th_mode(std::string_view s) {
  if (s == "test") return ThMode::test;
  if (s == "tolerance") return ThMode::tolerance;
  throw Error(ErrorKind::ConfigError, "th-mode must be test or tolerance, got '" + std::string(s) + "'");
}

}  // namespace ccg
