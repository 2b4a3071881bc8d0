#pragma once

#include <string>

#include <json.hpp>

#include "reid/metrics.hpp"

namespace reid {

/// {"map", "cmc": {"1","5","10","20"}, "per_query_ap", "skipped", "config"}.
/// `extra_config` entries are merged into "config".
nlohmann::json report_to_json(const EvalReport& report, const nlohmann::json& extra_config = nlohmann::json::object());

std::string report_csv_header();
std::string report_csv_row(const EvalReport& report);

}  // namespace reid
