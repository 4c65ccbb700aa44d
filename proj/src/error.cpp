#include "ccg/error.hpp"

namespace ccg {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::UnbalancedPanel: return "UnbalancedPanel";
    case ErrorKind::DuplicateObservation: return "DuplicateObservation";
    case ErrorKind::GroupTreatmentMismatch: return "GroupTreatmentMismatch";
    case ErrorKind::InvalidPanel: return "InvalidPanel";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::MissingPresetForCell: return "MissingPresetForCell";
    case ErrorKind::InsufficientPrePeriods: return "InsufficientPrePeriods";
    case ErrorKind::DegenerateGroup: return "DegenerateGroup";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::ZeroScale: return "ZeroScale";
    case ErrorKind::SingularPooledCovariance: return "SingularPooledCovariance";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TooFewUnits: return "TooFewUnits";
    case ErrorKind::NoCloseComparisonGroups: return "NoCloseComparisonGroups";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::PeriodOutOfRange: return "PeriodOutOfRange";
    case ErrorKind::TooFewGroups: return "TooFewGroups";
    case ErrorKind::NoCellsSurviveTrimming: return "NoCellsSurviveTrimming";
    case ErrorKind::NoCandidatesForCell: return "NoCandidatesForCell";
    case ErrorKind::NoComparisonGroups: return "NoComparisonGroups";
    case ErrorKind::RankDeficientPsi: return "RankDeficientPsi";
    case ErrorKind::FailureBudgetExceeded: return "FailureBudgetExceeded";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingColumn:
    case ErrorKind::UnbalancedPanel:
    case ErrorKind::DuplicateObservation:
    case ErrorKind::GroupTreatmentMismatch:
    case ErrorKind::InvalidPanel:
      return 1;
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidSpec:
    case ErrorKind::MissingPresetForCell:
      return 2;
    default:
      return 3;
  }
}

Error::Error(ErrorKind kind, const std::string& message, nlohmann::json detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      detail_(std::move(detail)) {}

nlohmann::json Error::to_json() const {
  return {{"error", std::string(to_string(kind_))}, {"message", what()}, {"detail", detail_}};
}

}  // namespace ccg
