#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace ccg {

enum class ErrorKind {
  // data violations
  MissingColumn,
  UnbalancedPanel,
  DuplicateObservation,
  GroupTreatmentMismatch,
  InvalidPanel,
  // configuration
  ConfigError,
  InvalidSpec,
  MissingPresetForCell,
  // estimation
  InsufficientPrePeriods,
  DegenerateGroup,
  GridMismatch,
  ZeroScale,
  SingularPooledCovariance,
  DimensionMismatch,
  TooFewUnits,
  NoCloseComparisonGroups,
  EmptySelection,
  PeriodOutOfRange,
  TooFewGroups,
  NoCellsSurviveTrimming,
  NoCandidatesForCell,
  NoComparisonGroups,
  RankDeficientPsi,
  FailureBudgetExceeded,
};

std::string_view to_string(ErrorKind kind);

// Process exit code for the CLI contract: 1 data, 2 config, 3 estimation.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, nlohmann::json detail = nlohmann::json::object());

  ErrorKind kind() const noexcept { return kind_; }
  const nlohmann::json& detail() const noexcept { return detail_; }
  nlohmann::json to_json() const;

 private:
  ErrorKind kind_;
  nlohmann::json detail_;
};

}  // namespace ccg
