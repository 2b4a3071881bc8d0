#include "reid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "reid/errors.hpp"
#include "text_util.hpp"

namespace reid {
namespace {

[[noreturn]] void bad_config(const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); }

std::string camera_name(std::size_t i) {
  auto digits = std::to_string(900 + i);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "c" + digits;
}

struct Sighting {
  ImageRecord record;
  std::string role;
  std::size_t step = 0;
  double arrival_minutes = 0.0;
  double gap_minutes = 0.0;
};

}  // namespace

void SynthConfig::validate() const {
  if (n_cameras < 2) bad_config("n_cameras must be at least 2");
  if (n_identities < 2) bad_config("n_identities must be at least 2");
  if (feature_dim < 2) bad_config("feature_dim must be at least 2");
  if (ambiguity_pairs * 2 > n_identities) bad_config("ambiguity_pairs must not exceed n_identities / 2");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) bad_config("noise_std must be finite and non-negative");
  if (!(dwell_minutes >= 0.0) || !std::isfinite(dwell_minutes)) bad_config("dwell_minutes must be non-negative");
  if (sightings_per_identity_per_camera < 1) bad_config("sightings_per_identity_per_camera must be positive");
  if (!(topology_scale_m > 0.0)) bad_config("topology_scale_m must be positive");
  if (!(day_start_sec >= 0.0) || !(day_span_sec > 0.0)) bad_config("day window must be non-negative and non-empty");
  if (!(twin_gap_max_minutes >= 0.0)) bad_config("twin_gap_max_minutes must be non-negative");
  if (!(walk_detour_factor >= 1.0)) bad_config("walk_detour_factor must be at least 1");
  try {
    transit_prior.validate();
    sample_prior(transit_prior, 1, 0);
  } catch (const Error& e) {
    bad_config(std::string("transit_prior: ") + e.what());
  }
}

nlohmann::json synth_config_to_json(const SynthConfig& c) {
  return {{"n_cameras", c.n_cameras},
          {"n_identities", c.n_identities},
          {"feature_dim", c.feature_dim},
          {"ambiguity_pairs", c.ambiguity_pairs},
          {"transit_prior", prior_to_json(c.transit_prior)},
          {"dwell_minutes", c.dwell_minutes},
          {"noise_std", c.noise_std},
          {"sightings_per_identity_per_camera", c.sightings_per_identity_per_camera},
          {"seed", c.seed},
          {"topology_scale_m", c.topology_scale_m},
          {"day_start_sec", c.day_start_sec},
          {"day_span_sec", c.day_span_sec},
          {"twin_gap_max_minutes", c.twin_gap_max_minutes},
          {"walk_detour_factor", c.walk_detour_factor}};
}

namespace {

// Rejects negatives and non-integers instead of letting them wrap.
template <class T>
T count_value(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned()) bad_config(std::string(key) + " must be a non-negative integer");
  return v.get<T>();
}

}  // namespace

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig c;
  if (!j.is_object()) bad_config("synth config must be a JSON object");
  static const std::vector<std::string> known{
      "n_cameras",   "n_identities",   "feature_dim",          "ambiguity_pairs",
      "transit_prior", "dwell_minutes", "noise_std",           "sightings_per_identity_per_camera",
      "seed",        "topology_scale_m", "day_start_sec",      "day_span_sec",
      "twin_gap_max_minutes", "walk_detour_factor"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) bad_config("unknown synth config key '" + k + "'");
  try {
    c.n_cameras = count_value(j, "n_cameras", c.n_cameras);
    c.n_identities = count_value(j, "n_identities", c.n_identities);
    c.feature_dim = count_value(j, "feature_dim", c.feature_dim);
    c.ambiguity_pairs = count_value(j, "ambiguity_pairs", c.ambiguity_pairs);
    if (j.contains("transit_prior")) c.transit_prior = prior_from_json(j.at("transit_prior"));
    c.dwell_minutes = j.value("dwell_minutes", c.dwell_minutes);
    c.noise_std = j.value("noise_std", c.noise_std);
    c.sightings_per_identity_per_camera =
        count_value(j, "sightings_per_identity_per_camera", c.sightings_per_identity_per_camera);
    c.seed = count_value(j, "seed", c.seed);
    c.topology_scale_m = j.value("topology_scale_m", c.topology_scale_m);
    c.day_start_sec = j.value("day_start_sec", c.day_start_sec);
    c.day_span_sec = j.value("day_span_sec", c.day_span_sec);
    c.twin_gap_max_minutes = j.value("twin_gap_max_minutes", c.twin_gap_max_minutes);
    c.walk_detour_factor = j.value("walk_detour_factor", c.walk_detour_factor);
  } catch (const nlohmann::json::exception& e) {
    bad_config(std::string("bad synth config: ") + e.what());
  } catch (const Error& e) {
    bad_config(e.what());
  }
  c.validate();
  return c;
}

std::vector<double> SynthOutput::transit_gaps_minutes() const {
  // Sightings at one step share the gap; take it once per (identity, step).
  std::vector<double> out;
  std::uint64_t last_pid = ~0ULL;
  std::size_t last_step = ~std::size_t{0};
  for (const auto& e : truth) {
    if (e.step == 0) continue;
    if (e.person_id == last_pid && e.step == last_step) continue;
    last_pid = e.person_id;
    last_step = e.step;
    out.push_back(e.transit_gap_minutes);
  }
  return out;
}

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  SynthOutput out;
  out.config = config;

  // Cameras: index 0 is the query camera.
  std::vector<std::string> cams;
  for (std::size_t i = 0; i < config.n_cameras; ++i) {
    cams.push_back(camera_name(i));
    out.fps_per_camera[cams.back()] = 10.0 + 2.5 * static_cast<double>(i % 5);
  }
  std::vector<std::pair<double, double>> points;
  for (std::size_t i = 0; i < config.n_cameras; ++i) {
    const double x = unit(rng) * config.topology_scale_m;
    const double y = unit(rng) * config.topology_scale_m;
    points.emplace_back(x, y);
  }
  std::vector<double> dist(config.n_cameras * config.n_cameras, 0.0);
  for (std::size_t i = 0; i < config.n_cameras; ++i)
    for (std::size_t j = 0; j < config.n_cameras; ++j)
      if (i != j)
        dist[i * config.n_cameras + j] =
            config.walk_detour_factor *
            std::hypot(points[i].first - points[j].first, points[i].second - points[j].second);
  out.topology = CameraTopology(cams, dist);

  // Appearance: twins (2k, 2k+1) for k < ambiguity_pairs share a centroid.
  std::vector<std::vector<double>> centroids(config.n_identities);
  for (std::size_t i = 0; i < config.n_identities; ++i) {
    if (i < 2 * config.ambiguity_pairs && i % 2 == 1) {
      centroids[i] = centroids[i - 1];
      continue;
    }
    centroids[i].resize(config.feature_dim);
    for (auto& v : centroids[i]) v = normal(rng);
  }
  for (std::size_t k = 0; k < config.ambiguity_pairs; ++k) out.ambiguous_pairs.push_back({2 * k + 1, 2 * k + 2});

  auto draw_gap = [&] {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double g = sample_prior(config.transit_prior, 1, rng())[0];
      if (g >= 0.0 && std::isfinite(g)) return g;
    }
    bad_config("transit prior yields no non-negative gaps");
  };

  auto observe = [&](std::size_t identity) {
    std::vector<double> f(config.feature_dim);
    for (std::size_t d = 0; d < config.feature_dim; ++d)
      f[d] = static_cast<double>(static_cast<float>(centroids[identity][d] + config.noise_std * normal(rng)));
    return f;
  };

  auto make_record = [&](std::size_t identity, std::size_t cam, double t_sec, std::size_t bbox) {
    ImageRecord r;
    r.person_id = identity + 1;
    r.camera_id = cams[cam];
    r.timestamp_sec = static_cast<std::int64_t>(std::llround(t_sec));
    r.frame_number = static_cast<std::int64_t>(std::llround(static_cast<double>(r.timestamp_sec) * out.fps_per_camera[cams[cam]]));
    r.bbox_index = static_cast<std::int64_t>(bbox);
    r.feature = observe(identity);
    return r;
  };

  std::vector<Sighting> sightings;
  std::vector<double> end_sec(config.n_identities, 0.0);
  const double dwell_sec = config.dwell_minutes * 60.0;
  for (std::size_t i = 0; i < config.n_identities; ++i) {
    double t0;
    if (i < 2 * config.ambiguity_pairs && i % 2 == 1)
      t0 = end_sec[i - 1] + unit(rng) * config.twin_gap_max_minutes * 60.0;
    else
      t0 = config.day_start_sec + unit(rng) * config.day_span_sec;

    sightings.push_back({make_record(i, 0, t0, 0), "query", 0, t0 / 60.0, 0.0});
    double depart = t0;
    std::size_t cam = 0;
    for (std::size_t step = 1; step < config.n_cameras; ++step) {
      // Uniform over gallery cameras other than the current one.
      std::vector<std::size_t> options;
      for (std::size_t c = 1; c < config.n_cameras; ++c)
        if (c != cam) options.push_back(c);
      cam = options[static_cast<std::size_t>(unit(rng) * static_cast<double>(options.size())) % options.size()];
      const double gap = draw_gap();
      const double arrival = depart + gap * 60.0;
      std::vector<double> times;
      for (std::size_t s = 0; s < config.sightings_per_identity_per_camera; ++s)
        times.push_back(arrival + unit(rng) * dwell_sec);
      std::sort(times.begin(), times.end());
      for (std::size_t s = 0; s < times.size(); ++s)
        sightings.push_back({make_record(i, cam, times[s], s), "gallery", step, arrival / 60.0, gap});
      depart = arrival + dwell_sec;
    }
    end_sec[i] = depart;
  }

  std::vector<ImageRecord> queries, gallery;
  std::vector<const Sighting*> gallery_src;
  for (const auto& s : sightings) {
    if (s.role == "query")
      queries.push_back(s.record);
    else
      gallery_src.push_back(&s);
  }
  std::stable_sort(gallery_src.begin(), gallery_src.end(), [](const Sighting* a, const Sighting* b) {
    const auto& ra = a->record;
    const auto& rb = b->record;
    return std::tie(ra.timestamp_sec, ra.person_id, ra.camera_id, ra.bbox_index) <
           std::tie(rb.timestamp_sec, rb.person_id, rb.camera_id, rb.bbox_index);
  });
  for (const auto* s : gallery_src) gallery.push_back(s->record);

  out.features.dimension = config.feature_dim;
  for (const auto& r : queries) out.manifest.queries.push_back(format_image_filename(r));
  for (const auto& r : gallery) out.manifest.gallery.push_back(format_image_filename(r));
  for (const auto* side : {&queries, &gallery})
    for (const auto& r : *side)
      out.features.entries.push_back(
          {format_image_filename(r), std::vector<float>(r.feature->begin(), r.feature->end())});

  for (const auto& s : sightings)
    out.truth.push_back({s.record.person_id, s.record.camera_id, s.role, s.step, s.arrival_minutes, s.gap_minutes,
                         format_image_filename(s.record)});
  out.dataset = Dataset(config.feature_dim, std::move(queries), std::move(gallery));
  return out;
}

nlohmann::json truth_event_to_json(const TruthEvent& e) {
  return {{"pid", e.person_id},         {"camera", e.camera_id},
          {"role", e.role},             {"step", e.step},
          {"arrival_minutes", e.arrival_minutes}, {"transit_gap_minutes", e.transit_gap_minutes},
          {"filename", e.filename}};
}

std::string format_truth_jsonl(const std::vector<TruthEvent>& truth) {
  std::string out;
  for (const auto& e : truth) out += truth_event_to_json(e).dump() + "\n";
  return out;
}

std::vector<TruthEvent> parse_truth_jsonl(std::string_view text) {
  std::vector<TruthEvent> out;
  for (auto line : detail::split_lines(text)) {
    line = detail::trim(line);
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("pid").get<std::uint64_t>(), j.at("camera").get<std::string>(),
                     j.at("role").get<std::string>(), j.at("step").get<std::size_t>(),
                     j.at("arrival_minutes").get<double>(), j.at("transit_gap_minutes").get<double>(),
                     j.at("filename").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedInput, std::string("bad truth line: ") + e.what());
    }
  }
  return out;
}

std::string format_fps_csv(const std::map<std::string, double>& fps) {
  std::string out = "camera,fps\n";
  for (const auto& [cam, v] : fps) out += cam + "," + detail::format_g17(v) + "\n";
  return out;
}

std::map<std::string, double> parse_fps_csv(std::string_view text) {
  std::map<std::string, double> out;
  bool header = true;
  for (auto line : detail::split_lines(text)) {
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != 2) throw Error(ErrorCode::MalformedInput, "fps CSV rows need camera,fps");
    if (header && detail::trim(cells[0]) == "camera") {
      header = false;
      continue;
    }
    header = false;
    out[normalize_camera_id(detail::trim(cells[0]))] = detail::parse_double(cells[1]);
  }
  return out;
}

void write_synth(const SynthOutput& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_manifest(dir / "manifest.txt", out.manifest);
  write_features_binary(dir / "features.ridf", out.features);
  write_topology_csv(dir / "topology.csv", out.topology);
  write_file_bytes(dir / "fps.csv", format_fps_csv(out.fps_per_camera));
  write_file_bytes(dir / "truth.jsonl", format_truth_jsonl(out.truth));
  nlohmann::json meta;
  meta["config"] = synth_config_to_json(out.config);
  meta["query_camera"] = out.topology.camera_ids().front();
  meta["ambiguous_pairs"] = out.ambiguous_pairs;
  meta["fps_per_camera"] = out.fps_per_camera;
  meta["note"] =
      "Synthetic data. Camera positions are uniform in a square of side topology_scale_m; walking distance is "
      "the straight-line distance times walk_detour_factor. All parameters are generator choices.";
  write_file_bytes(dir / "synth_meta.json", meta.dump(2) + "\n");
}

}  // namespace reid
