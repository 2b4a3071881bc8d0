#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "reid/metrics.hpp"
#include "reid/rerank.hpp"
#include "reid/synth.hpp"
#include "reid/temporal.hpp"

namespace reid {

/// Where the temporal prior of a re-ranking row comes from.
enum class PriorSource {
  Fit,      // gamma fitted to the dataset's matched-pair gaps
  Transit,  // the generator's own transit prior
  Given,    // an explicit spec
};

struct BenchRerank {
  std::string name;
  RerankConfig config;
  PriorSource prior_source = PriorSource::Fit;
};

struct BenchConfig {
  SynthConfig synth;
  TimeWindow window{0.0, 30.0};
  std::vector<BenchRerank> reranks;

  /// appearance, window, temporal and spatial_temporal rows.
  static BenchConfig defaults();
};

nlohmann::json bench_config_to_json(const BenchConfig& c);
/// Missing keys keep their defaults. Throws InvalidConfig.
BenchConfig bench_config_from_json(const nlohmann::json& j);

struct BenchRow {
  std::string method;
  EvalReport report;
  nlohmann::json detail = nlohmann::json::object();
};

/// Appearance-only, window-filtered, then every configured re-ranking
/// (restricted to the window), all on the same generated dataset.
std::vector<BenchRow> run_benchmark(const SynthOutput& data, const BenchConfig& config, unsigned threads = 1);

std::string bench_csv(const std::vector<BenchRow>& rows);

/// Mean and sample standard deviation per method over repeated runs.
std::string bench_aggregate_csv(const std::vector<std::vector<BenchRow>>& runs);

}  // namespace reid
