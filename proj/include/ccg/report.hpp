#pragma once

#include <string>

#include <json.hpp>

#include "ccg/config.hpp"
#include "ccg/distance.hpp"
#include "ccg/estimator.hpp"
#include "ccg/montecarlo.hpp"
#include "ccg/selection.hpp"
#include "ccg/timehomog.hpp"

namespace ccg {

nlohmann::json to_json(const PipelineConfig& c);
nlohmann::json to_json(const DistanceReport& d);
nlohmann::json to_json(const SelectionResult& s);
nlohmann::json to_json(const AttEstimate& e);
nlohmann::json to_json(const PlaceboReport& p);
nlohmann::json to_json(const TimeHomogReport& r);
nlohmann::json to_json(const TransferResult& r);
nlohmann::json to_json(const ConditionalResult& r);
nlohmann::json to_json(const GroupTimeResult& r);
nlohmann::json to_json(const EstimandSummary& s);
nlohmann::json to_json(const McSummary& s);
nlohmann::json to_json(const RobustnessTable& t);

// 64-bit FNV-1a of the compact JSON text, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

}  // namespace ccg
