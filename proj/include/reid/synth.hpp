#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "reid/dataset.hpp"
#include "reid/feature_io.hpp"
#include "reid/priors.hpp"

namespace reid {

/// Generator settings for a synthetic non-overlapping camera network. Every
/// value here is a generator choice, not a measured quantity.
struct SynthConfig {
  std::size_t n_cameras = 5;
  std::size_t n_identities = 50;
  std::size_t feature_dim = 16;
  std::size_t ambiguity_pairs = 10;
  PriorSpec transit_prior = PriorSpec::gamma(2.0, 0.0, 1.5);  // minutes between cameras
  double dwell_minutes = 1.0;
  double noise_std = 0.8;
  std::size_t sightings_per_identity_per_camera = 2;
  std::uint64_t seed = 7;
  double topology_scale_m = 100.0;
  double day_start_sec = 8.0 * 3600.0;
  double day_span_sec = 2.0 * 3600.0;
  // The second member of an ambiguous pair enters the query camera within
  // this many minutes after the first member's last sighting.
  double twin_gap_max_minutes = 10.0;
  double walk_detour_factor = 1.3;

  /// Throws InvalidConfig.
  void validate() const;
};

nlohmann::json synth_config_to_json(const SynthConfig& c);
/// Missing keys keep their defaults.
SynthConfig synth_config_from_json(const nlohmann::json& j);

/// One sighting of one identity.
struct TruthEvent {
  std::uint64_t person_id = 0;
  std::string camera_id;
  std::string role;  // "query" or "gallery"
  std::size_t step = 0;  // 0 at the query camera
  double arrival_minutes = 0.0;  // arrival at this camera, minutes since midnight
  double transit_gap_minutes = 0.0;  // gap that led to this camera (0 at step 0)
  std::string filename;
};

struct SynthOutput {
  SynthConfig config;
  Dataset dataset;
  Manifest manifest;
  FeatureTable features;
  CameraTopology topology;
  std::map<std::string, double> fps_per_camera;
  std::vector<TruthEvent> truth;
  std::vector<std::vector<std::uint64_t>> ambiguous_pairs;

  /// Inter-camera transit gaps in minutes, one per walk step.
  std::vector<double> transit_gaps_minutes() const;
};

/// Deterministic given config.seed.
SynthOutput generate(const SynthConfig& config);

nlohmann::json truth_event_to_json(const TruthEvent& e);
std::string format_truth_jsonl(const std::vector<TruthEvent>& truth);
std::vector<TruthEvent> parse_truth_jsonl(std::string_view text);

/// Writes manifest.txt, features.ridf, topology.csv, fps.csv, truth.jsonl and
/// synth_meta.json into dir.
void write_synth(const SynthOutput& out, const std::filesystem::path& dir);

std::string format_fps_csv(const std::map<std::string, double>& fps);
std::map<std::string, double> parse_fps_csv(std::string_view text);

}  // namespace reid
