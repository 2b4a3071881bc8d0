#include "reid/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>

#include "reid/bench.hpp"
#include "reid/dataset.hpp"
#include "reid/digest.hpp"
#include "reid/errors.hpp"
#include "reid/feature_io.hpp"
#include "reid/metrics.hpp"
#include "reid/priors.hpp"
#include "reid/report.hpp"
#include "reid/rerank.hpp"
#include "reid/synth.hpp"
#include "reid/temporal.hpp"
#include "text_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace reid {
namespace {

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Provenance for one invocation. The digest covers everything except the
// wall-clock duration and thread count, so reruns reproduce it.
class RunRecorder {
 public:
  explicit RunRecorder(std::string subcommand)
      : subcommand_(std::move(subcommand)), start_(std::chrono::steady_clock::now()) {}

  json& config() { return config_; }
  void add_input(const std::string& role, const fs::path& path) {
    inputs_[role] = {{"path", path.string()}, {"digest", digest_file(path)}};
  }
  void add_seed(std::uint64_t seed) { seeds_.push_back(seed); }

  json deterministic_part() const {
    return {{"subcommand", subcommand_},
            {"config", config_},
            {"inputs", inputs_},
            {"tool_version", kToolVersion},
            {"seeds", seeds_}};
  }
  std::string digest() const { return digest_string(deterministic_part().dump()); }

  void write(const fs::path& dir, unsigned threads) const {
    auto j = deterministic_part();
    j["digest"] = digest();
    j["threads"] = threads;
    j["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_file_bytes(dir / "run_manifest.json", dump(j));
  }

 private:
  std::string subcommand_;
  std::chrono::steady_clock::time_point start_;
  json config_ = json::object();
  json inputs_ = json::object();
  std::vector<std::uint64_t> seeds_;
};

struct Common {
  std::string output_dir = ".";
  unsigned threads = 1;

  fs::path out() const {
    fs::create_directories(output_dir);
    return output_dir;
  }
};

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--output-dir", common.output_dir, "Directory for all artifacts")->capture_default_str();
  sub->add_option("--threads", common.threads, "Worker threads for metrics and re-ranking")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
}

struct DatasetArgs {
  std::string manifest;
  std::string features;
  std::string topology;
};

void add_dataset_args(CLI::App* sub, DatasetArgs& a, bool need_dataset = true) {
  auto* m = sub->add_option("--manifest", a.manifest, "Manifest with [query]/[gallery] sections");
  auto* f = sub->add_option("--features", a.features, "Features file (RIDF binary or CSV)");
  if (need_dataset) {
    m->required();
    f->required();
  }
  sub->add_option("--topology", a.topology, "Camera walking-distance CSV");
}

Dataset load_inputs(const DatasetArgs& a, RunRecorder& rec) {
  if (!fs::exists(a.manifest)) throw Error(ErrorCode::IoError, "manifest not found: " + a.manifest);
  if (!fs::exists(a.features)) throw Error(ErrorCode::MissingFeature, "features file not found: " + a.features);
  rec.add_input("manifest", a.manifest);
  rec.add_input("features", a.features);
  auto ds = load_dataset(a.manifest, a.features);
  ds.require_non_empty();
  return ds;
}

std::optional<CameraTopology> load_topology(const DatasetArgs& a, RunRecorder& rec) {
  if (a.topology.empty()) return std::nullopt;
  rec.add_input("topology", a.topology);
  return read_topology_csv(a.topology);
}

void write_report(const fs::path& dir, const EvalReport& report, const RunRecorder& rec, json extra = json::object()) {
  extra["run_manifest_digest"] = rec.digest();
  write_file_bytes(dir / "report.json", dump(report_to_json(report, extra)));
  write_file_bytes(dir / "report.csv", report_csv_header() + report_csv_row(report));
}

// --- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  Common common;
  DatasetArgs data;
  std::string metric = "euclidean";
  std::string window;
};

void cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  RunRecorder rec("evaluate");
  const auto ds = load_inputs(a.data, rec);
  load_topology(a.data, rec);
  const auto metric = parse_metric(a.metric);
  rec.config()["metric"] = metric_name(metric);
  const auto mask = a.window.empty() ? exclusion_mask(ds) : reduce_gallery(ds, parse_time_window(a.window));
  rec.config()["mask"] = mask.provenance;

  const auto dir = a.common.out();
  const auto dist = compute_distances(ds, metric, a.common.threads);
  const auto report = evaluate(ds, dist, mask, a.common.threads);
  write_report(dir, report, rec);
  rec.write(dir, a.common.threads);
  out << "mAP " << detail::format_g17(report.map) << "  Rank1 " << detail::format_g17(report.cmc.at(1)) << "\n";
}

// --- filter ----------------------------------------------------------------

struct FilterArgs {
  Common common;
  DatasetArgs data;
  std::string window = "0:30";
};

void cmd_filter(const FilterArgs& a, std::ostream& out) {
  RunRecorder rec("filter");
  const auto ds = load_inputs(a.data, rec);
  const auto window = parse_time_window(a.window);
  rec.config()["window"] = window.label();
  const auto mask = reduce_gallery(ds, window);

  const auto dir = a.common.out();
  std::string csv = "q_index,g_index,kept\n";
  for (std::size_t q = 0; q < mask.rows; ++q)
    for (std::size_t g = 0; g < mask.cols; ++g)
      csv += std::to_string(q) + "," + std::to_string(g) + "," + (mask.at(q, g) ? "1" : "0") + "\n";
  write_file_bytes(dir / "mask.csv", csv);

  const auto dist = compute_distances(ds, Metric::Euclidean, a.common.threads);
  auto report = evaluate_rankings(ds, rank_gallery(dist, mask, a.common.threads), mask, "window", dist.metric_name);
  write_report(dir, report, rec);
  rec.write(dir, a.common.threads);
  out << "kept " << mask.count() << " of " << mask.rows * mask.cols << " pairs; mAP "
      << detail::format_g17(report.map) << "\n";
}

// --- rerank ----------------------------------------------------------------

struct RerankArgs {
  Common common;
  DatasetArgs data;
  double sigma = 1.0;
  std::string prior_json;
  std::string spatial = "off";
  double sigma_s = 100.0;
  std::string window;
  bool frame_mode = false;
  std::string fps;
};

void cmd_rerank(const RerankArgs& a, std::ostream& out) {
  RunRecorder rec("rerank");
  const auto ds = load_inputs(a.data, rec);
  const auto topo = load_topology(a.data, rec);

  RerankConfig config;
  config.sigma = a.sigma;
  if (a.prior_json.empty()) throw Error(ErrorCode::InvalidConfig, "--prior-json is required");
  rec.add_input("prior", a.prior_json);
  try {
    config.temporal_prior = prior_from_json(json::parse(read_file_bytes(a.prior_json)));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("prior JSON: ") + e.what());
  }
  config.spatial = {parse_spatial_mode(a.spatial), a.sigma_s};
  if (a.frame_mode) {
    if (a.fps.empty()) throw Error(ErrorCode::MissingFps, "--frame-mode needs --fps");
    rec.add_input("fps", a.fps);
    config.frame_mode = FrameModeConfig{parse_fps_csv(read_file_bytes(a.fps))};
  }
  config.validate();
  std::optional<TimeWindow> window;
  if (!a.window.empty()) window = parse_time_window(a.window);

  rec.config()["sigma"] = config.sigma;
  rec.config()["temporal_prior"] = prior_to_json(config.temporal_prior);
  rec.config()["spatial"] = spatial_mode_name(config.spatial.mode);
  rec.config()["sigma_s"] = config.spatial.sigma_s;
  rec.config()["window"] = window ? window->label() : "none";
  rec.config()["frame_mode"] = a.frame_mode;
  rec.config()["dt_unit"] = "minutes";

  const auto result = rerank(ds, config, window, topo ? &*topo : nullptr, a.common.threads);
  const auto linear = to_linear(result.log_scores);

  const auto dir = a.common.out();
  std::string csv = "query,rank,gallery_index,score\n";
  for (std::size_t q = 0; q < result.rankings.size(); ++q)
    for (std::size_t k = 0; k < result.rankings[q].size(); ++k) {
      const auto g = result.rankings[q][k];
      csv += std::to_string(q) + "," + std::to_string(k + 1) + "," + std::to_string(g) + "," +
             detail::format_g17(linear.at(q, g)) + "\n";
    }
  write_file_bytes(dir / "rankings.csv", csv);

  const auto method = a.frame_mode ? "rerank_tr" : "rerank";
  const auto report = evaluate_rankings(ds, result.rankings, result.mask, method, result.appearance.metric_name);
  write_report(dir, report, rec,
               {{"sigma", config.sigma}, {"temporal_prior", prior_to_json(config.temporal_prior)}});
  rec.write(dir, a.common.threads);
  out << "mAP " << detail::format_g17(report.map) << "  Rank1 " << detail::format_g17(report.cmc.at(1)) << "\n";
}

// --- fit-priors ------------------------------------------------------------

struct FitArgs {
  Common common;
  DatasetArgs data;
  std::string samples;
  std::string families;
  std::optional<double> fixed_loc;
  bool optimizer = false;
};

std::vector<double> parse_samples(std::string_view text) {
  std::vector<double> out;
  for (auto line : detail::split_lines(text)) {
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    out.push_back(detail::parse_double(line));
  }
  return out;
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
  RunRecorder rec("fit-priors");
  std::vector<double> samples;
  if (!a.samples.empty()) {
    rec.add_input("samples", a.samples);
    samples = parse_samples(read_file_bytes(a.samples));
  } else {
    if (a.data.manifest.empty() || a.data.features.empty())
      throw Error(ErrorCode::InvalidConfig, "fit-priors needs --samples or --manifest with --features");
    samples = delta_values(empirical_delta_t(load_inputs(a.data, rec)));
  }

  std::vector<PriorFamily> families;
  if (a.families.empty()) {
    families = all_prior_families();
  } else {
    for (auto name : detail::split(a.families, ',')) families.push_back(parse_family(detail::trim(name)));
  }

  FitOptions options;
  options.fixed_loc = a.fixed_loc;
  options.method = a.optimizer ? FitMethod::Optimizer : FitMethod::Auto;
  rec.config()["families"] = json::array();
  for (auto f : families) rec.config()["families"].push_back(family_name(f));
  rec.config()["fixed_loc"] = a.fixed_loc ? json(*a.fixed_loc) : json(nullptr);
  rec.config()["method"] = a.optimizer ? "optimizer" : "auto";
  rec.config()["n_samples"] = samples.size();

  const auto dir = a.common.out();
  json summary = json::array();
  std::string csv = "family,log_likelihood,aic,method,status\n";
  bool non_converged = false;
  for (auto f : families) {
    const auto name = family_name(f);
    try {
      const auto fit = fit_prior(samples, f, options);
      auto j = prior_to_json(fit.spec);
      j["log_likelihood"] = fit.log_likelihood;
      j["method"] = fit.method;
      j["n_samples"] = samples.size();
      j["run_manifest_digest"] = rec.digest();
      write_file_bytes(dir / ("prior_" + name + ".json"), dump(j));
      const double k = static_cast<double>(shape_parameter_names(f).size() + (f == PriorFamily::BoxUniform ? 0 : 2));
      const double aic = 2.0 * k - 2.0 * fit.log_likelihood;
      summary.push_back({{"family", name}, {"log_likelihood", fit.log_likelihood}, {"aic", aic}, {"status", "ok"}});
      csv += name + "," + detail::format_g17(fit.log_likelihood) + "," + detail::format_g17(aic) + "," + fit.method +
             ",ok\n";
      out << name << ": log-likelihood " << detail::format_g17(fit.log_likelihood) << "\n";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonConvergence) throw;
      non_converged = true;
      summary.push_back({{"family", name}, {"status", "NonConvergence"}, {"message", e.what()}});
      csv += name + ",,,,NonConvergence\n";
    }
  }
  write_file_bytes(dir / "fit_summary.json", dump({{"fits", summary}, {"run_manifest_digest", rec.digest()}}));
  write_file_bytes(dir / "fit_summary.csv", csv);
  rec.write(dir, a.common.threads);
  return non_converged ? 3 : 0;
}

// --- synth / bench ---------------------------------------------------------

json read_json_file(const std::string& path) {
  try {
    return json::parse(read_file_bytes(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, "cannot parse " + path + ": " + e.what());
  }
}

struct SynthArgs {
  Common common;
  std::string config;
  std::optional<std::uint64_t> seed;
};

void cmd_synth(const SynthArgs& a, std::ostream& out) {
  RunRecorder rec("synth");
  SynthConfig config;
  if (!a.config.empty()) {
    rec.add_input("config", a.config);
    config = synth_config_from_json(read_json_file(a.config));
  }
  if (a.seed) config.seed = *a.seed;
  rec.config() = synth_config_to_json(config);
  rec.add_seed(config.seed);
  const auto data = generate(config);
  const auto dir = a.common.out();
  write_synth(data, dir);
  rec.write(dir, a.common.threads);
  out << "wrote " << data.dataset.num_queries() << " queries and " << data.dataset.num_gallery()
      << " gallery images to " << dir.string() << "\n";
}

struct BenchArgs {
  Common common;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t repeat = 1;
};

void cmd_bench(const BenchArgs& a, std::ostream& out) {
  RunRecorder rec("bench");
  auto config = BenchConfig::defaults();
  if (!a.config.empty()) {
    rec.add_input("config", a.config);
    config = bench_config_from_json(read_json_file(a.config));
  }
  if (a.seed) config.synth.seed = *a.seed;
  if (a.repeat < 1) throw Error(ErrorCode::InvalidConfig, "--repeat must be at least 1");
  rec.config() = bench_config_to_json(config);
  rec.config()["repeat"] = a.repeat;

  const auto dir = a.common.out();
  std::vector<std::vector<BenchRow>> runs;
  json details = json::array();
  for (std::size_t i = 0; i < a.repeat; ++i) {
    auto run_config = config;
    run_config.synth.seed = config.synth.seed + i;
    rec.add_seed(run_config.synth.seed);
    const auto data = generate(run_config.synth);
    auto rows = run_benchmark(data, run_config, a.common.threads);
    json run = {{"seed", run_config.synth.seed}, {"rows", json::array()}};
    for (const auto& r : rows)
      run["rows"].push_back({{"method", r.method}, {"report", report_to_json(r.report)}, {"detail", r.detail}});
    details.push_back(std::move(run));
    if (a.repeat > 1) {
      char name[32];
      std::snprintf(name, sizeof(name), "run_%03zu", i);
      fs::create_directories(dir / name);
      write_file_bytes(dir / name / "bench.csv", bench_csv(rows));
    }
    runs.push_back(std::move(rows));
  }
  const auto table = a.repeat > 1 ? bench_aggregate_csv(runs) : bench_csv(runs.front());
  write_file_bytes(dir / "bench.csv", table);
  write_file_bytes(dir / "bench_details.json", dump({{"runs", details}, {"run_manifest_digest", rec.digest()}}));
  rec.write(dir, a.common.threads);
  out << table;
}

void report_error(std::ostream& err, std::string_view code, const std::string& message) {
  err << json{{"error", code}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Person re-identification evaluation and temporal re-ranking"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "mAP/CMC of appearance ranking");
  add_common(evaluate_cmd, ev.common);
  add_dataset_args(evaluate_cmd, ev.data);
  evaluate_cmd->add_option("--metric", ev.metric, "euclidean | squared_euclidean | cosine_distance")
      ->capture_default_str();
  evaluate_cmd->add_option("--window", ev.window, "Optional gallery window MIN:MAX in minutes");

  FilterArgs fi;
  auto* filter_cmd = app.add_subcommand("filter", "Time-window gallery reduction");
  add_common(filter_cmd, fi.common);
  add_dataset_args(filter_cmd, fi.data);
  filter_cmd->add_option("--window", fi.window, "Gallery window MIN:MAX in minutes")->capture_default_str();

  RerankArgs rr;
  auto* rerank_cmd = app.add_subcommand("rerank", "Bayesian temporal/spatial re-ranking");
  add_common(rerank_cmd, rr.common);
  add_dataset_args(rerank_cmd, rr.data);
  rerank_cmd->add_option("--sigma", rr.sigma, "Appearance Gaussian std")->capture_default_str();
  rerank_cmd->add_option("--prior-json", rr.prior_json, "Temporal prior spec (JSON)");
  rerank_cmd->add_option("--spatial", rr.spatial, "off | laplace | prop")->capture_default_str();
  rerank_cmd->add_option("--sigma-s", rr.sigma_s, "Laplace spatial scale in meters")->capture_default_str();
  rerank_cmd->add_option("--window", rr.window, "Optional gallery window MIN:MAX in minutes");
  rerank_cmd->add_flag("--frame-mode", rr.frame_mode, "Use within-camera frame gaps instead of timestamps");
  rerank_cmd->add_option("--fps", rr.fps, "CSV camera,fps for --frame-mode");

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit-priors", "Fit temporal prior families to matched-pair gaps");
  add_common(fit_cmd, fa.common);
  add_dataset_args(fit_cmd, fa.data, false);
  fit_cmd->add_option("--samples", fa.samples, "Text file with one gap (minutes) per line");
  fit_cmd->add_option("--families", fa.families, "Comma-separated families (default: all)");
  fit_cmd->add_option("--fixed-loc", fa.fixed_loc, "Hold loc fixed instead of profiling it");
  fit_cmd->add_flag("--optimizer", fa.optimizer, "Use the generic optimizer even where a closed form exists");

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic camera-network dataset");
  add_common(synth_cmd, sa.common);
  synth_cmd->add_option("--config", sa.config, "Synth config JSON");
  synth_cmd->add_option("--seed", sa.seed, "Overrides the config seed");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Synthetic benchmark table");
  add_common(bench_cmd, ba.common);
  bench_cmd->add_option("--config", ba.config, "Bench config JSON");
  bench_cmd->add_option("--seed", ba.seed, "Overrides the synth seed");
  bench_cmd->add_option("--repeat", ba.repeat, "Runs with seeds seed..seed+N-1")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "UsageError", e.what());
    return 2;
  }

  try {
    if (*evaluate_cmd) cmd_evaluate(ev, out);
    if (*filter_cmd) cmd_filter(fi, out);
    if (*rerank_cmd) cmd_rerank(rr, out);
    if (*fit_cmd) return cmd_fit(fa, out);
    if (*synth_cmd) cmd_synth(sa, out);
    if (*bench_cmd) cmd_bench(ba, out);
  } catch (const Error& e) {
    report_error(err, e.code_name(), e.what());
    return e.code() == ErrorCode::NonConvergence ? 3 : 2;
  } catch (const fs::filesystem_error& e) {
    report_error(err, "IoError", e.what());
    return 2;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"reid"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace reid
