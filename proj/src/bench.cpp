#include "reid/bench.hpp"

#include <cmath>

#include "reid/errors.hpp"
#include "text_util.hpp"

namespace reid {
namespace {

std::string source_name(PriorSource s) {
  switch (s) {
    case PriorSource::Fit: return "fit";
    case PriorSource::Transit: return "transit";
    case PriorSource::Given: return "given";
  }
  return "fit";
}

const std::vector<std::pair<std::string, int>>& table_columns() {
  static const std::vector<std::pair<std::string, int>> cols{{"mAP", 0}, {"Rank1", 1}, {"Rank5", 5}, {"Rank10", 10}};
  return cols;
}

double column_value(const EvalReport& r, int k) { return k == 0 ? r.map : r.cmc.at(k); }

}  // namespace

BenchConfig BenchConfig::defaults() {
  BenchConfig c;
  BenchRerank temporal;
  temporal.name = "temporal";
  temporal.config.sigma = 1.5;
  BenchRerank spatial = temporal;
  spatial.name = "spatial_temporal";
  spatial.config.spatial = {SpatialMode::Laplace, 400.0};
  c.reranks = {temporal, spatial};
  return c;
}

nlohmann::json bench_config_to_json(const BenchConfig& c) {
  nlohmann::json j;
  j["synth"] = synth_config_to_json(c.synth);
  j["window"] = {c.window.t_min_minutes, c.window.t_max_minutes};
  j["reranks"] = nlohmann::json::array();
  for (const auto& r : c.reranks) {
    nlohmann::json e = {{"name", r.name},
                        {"sigma", r.config.sigma},
                        {"prior", source_name(r.prior_source)},
                        {"spatial", spatial_mode_name(r.config.spatial.mode)},
                        {"sigma_s", r.config.spatial.sigma_s}};
    if (r.prior_source == PriorSource::Given) e["temporal_prior"] = prior_to_json(r.config.temporal_prior);
    j["reranks"].push_back(std::move(e));
  }
  return j;
}

BenchConfig bench_config_from_json(const nlohmann::json& j) {
  auto c = BenchConfig::defaults();
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "bench config must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (k != "synth" && k != "window" && k != "reranks")
      throw Error(ErrorCode::InvalidConfig, "unknown bench config key '" + k + "'");
  try {
    if (j.contains("synth")) c.synth = synth_config_from_json(j.at("synth"));
    if (j.contains("window")) {
      const auto& w = j.at("window");
      c.window = w.is_string() ? parse_time_window(w.get<std::string>())
                               : TimeWindow(w.at(0).get<double>(), w.at(1).get<double>());
    }
    if (j.contains("reranks")) {
      c.reranks.clear();
      for (const auto& e : j.at("reranks")) {
        BenchRerank r;
        r.name = e.at("name").get<std::string>();
        r.config.sigma = e.value("sigma", 1.5);
        const auto prior = e.value("prior", std::string("fit"));
        if (prior == "fit") {
          r.prior_source = PriorSource::Fit;
        } else if (prior == "transit") {
          r.prior_source = PriorSource::Transit;
        } else if (prior == "given") {
          r.prior_source = PriorSource::Given;
          r.config.temporal_prior = prior_from_json(e.at("temporal_prior"));
        } else {
          throw Error(ErrorCode::InvalidConfig, "prior must be fit, transit or given");
        }
        r.config.spatial.mode = parse_spatial_mode(e.value("spatial", std::string("off")));
        r.config.spatial.sigma_s = e.value("sigma_s", 100.0);
        r.config.validate();
        c.reranks.push_back(std::move(r));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad bench config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return c;
}

std::vector<BenchRow> run_benchmark(const SynthOutput& data, const BenchConfig& config, unsigned threads) {
  const auto& ds = data.dataset;
  const auto dist = compute_distances(ds, Metric::Euclidean, threads);
  const auto full_mask = exclusion_mask(ds);
  const auto window_mask = reduce_gallery(ds, config.window);

  std::vector<BenchRow> rows;
  rows.push_back({"appearance", evaluate_rankings(ds, rank_gallery(dist, full_mask, threads), full_mask,
                                                  "appearance", dist.metric_name)});
  rows.push_back({"window", evaluate_rankings(ds, rank_gallery(dist, window_mask, threads), window_mask, "window",
                                              dist.metric_name)});

  std::optional<FitResult> fitted;
  for (const auto& r : config.reranks) {
    RerankConfig rc = r.config;
    nlohmann::json detail;
    if (r.prior_source == PriorSource::Fit) {
      if (!fitted) fitted = fit_prior(delta_values(empirical_delta_t(ds)), PriorFamily::Gamma);
      rc.temporal_prior = fitted->spec;
    } else if (r.prior_source == PriorSource::Transit) {
      rc.temporal_prior = data.config.transit_prior;
    }
    detail["temporal_prior"] = prior_to_json(rc.temporal_prior);
    detail["sigma"] = rc.sigma;
    detail["spatial"] = spatial_mode_name(rc.spatial.mode);
    if (rc.spatial.mode == SpatialMode::Laplace) detail["sigma_s"] = rc.spatial.sigma_s;
    const auto* topo = rc.spatial.mode == SpatialMode::Off ? nullptr : &data.topology;
    const auto log_scores = posterior_log_scores(ds, rc, window_mask, topo, threads);
    const auto ranking = order_by_posterior(log_scores, dist, window_mask, threads);
    auto report = evaluate_rankings(ds, ranking, window_mask, r.name, dist.metric_name);
    rows.push_back({r.name, std::move(report), std::move(detail)});
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "method";
  for (const auto& [name, k] : table_columns()) out += "," + name;
  out += "\n";
  for (const auto& row : rows) {
    out += row.method;
    for (const auto& [name, k] : table_columns()) out += "," + detail::format_g17(column_value(row.report, k));
    out += "\n";
  }
  return out;
}

std::string bench_aggregate_csv(const std::vector<std::vector<BenchRow>>& runs) {
  if (runs.empty()) throw Error(ErrorCode::InvalidConfig, "no benchmark runs to aggregate");
  const auto& cols = table_columns();
  std::string out = "method";
  for (const auto& [name, k] : cols) out += "," + name;
  for (const auto& [name, k] : cols) out += "," + name + "_std";
  out += "\n";
  const double n = static_cast<double>(runs.size());
  for (std::size_t m = 0; m < runs.front().size(); ++m) {
    out += runs.front()[m].method;
    std::vector<double> means, stds;
    for (const auto& [name, k] : cols) {
      double sum = 0.0;
      for (const auto& run : runs) sum += column_value(run.at(m).report, k);
      const double mean = sum / n;
      double ss = 0.0;
      for (const auto& run : runs) {
        const double d = column_value(run.at(m).report, k) - mean;
        ss += d * d;
      }
      means.push_back(mean);
      stds.push_back(runs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0);
    }
    for (double v : means) out += "," + detail::format_g17(v);
    for (double v : stds) out += "," + detail::format_g17(v);
    out += "\n";
  }
  return out;
}

}  // namespace reid
