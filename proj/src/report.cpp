#include "reid/report.hpp"

#include "text_util.hpp"

namespace reid {

nlohmann::json report_to_json(const EvalReport& report, const nlohmann::json& extra_config) {
  nlohmann::json j;
  j["map"] = report.map;
  j["cmc"] = nlohmann::json::object();
  for (const auto& [k, v] : report.cmc) j["cmc"][std::to_string(k)] = v;
  j["per_query_ap"] = nlohmann::json::array();
  for (const auto& qa : report.per_query_ap) j["per_query_ap"].push_back({{"query", qa.query}, {"ap", qa.ap}});
  j["skipped"] = report.skipped_queries;
  nlohmann::json config = {{"method", report.method},
                           {"metric", report.metric},
                           {"mask", report.mask_provenance},
                           {"config_digest", report.config_digest},
                           {"dt_unit", "minutes"}};
  for (const auto& [k, v] : extra_config.items()) config[k] = v;
  j["config"] = std::move(config);
  return j;
}

std::string report_csv_header() {
  return "method,mAP,Rank1,Rank5,Rank10,Rank20,evaluated,skipped,config_digest\n";
}

std::string report_csv_row(const EvalReport& report) {
  auto cmc = [&](int k) {
    const auto it = report.cmc.find(k);
    return detail::format_g17(it == report.cmc.end() ? 0.0 : it->second);
  };
  return report.method + "," + detail::format_g17(report.map) + "," + cmc(1) + "," + cmc(5) + "," + cmc(10) + "," +
         cmc(20) + "," + std::to_string(report.per_query_ap.size()) + "," +
         std::to_string(report.skipped_queries.size()) + "," + report.config_digest + "\n";
}

}  // namespace reid
