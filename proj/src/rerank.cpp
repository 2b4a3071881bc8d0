#include "reid/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "reid/errors.hpp"
#include "reid/parallel.hpp"

namespace reid {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_spatial_factor(const SpatialConfig& spatial, double delta_s) {
  switch (spatial.mode) {
    case SpatialMode::Off: return 0.0;
    case SpatialMode::Laplace: return -std::abs(delta_s) / spatial.sigma_s;
    case SpatialMode::Proportional: return delta_s > 0.0 ? std::log(delta_s) : kNegInf;
  }
  return 0.0;
}

}  // namespace

std::string spatial_mode_name(SpatialMode m) {
  switch (m) {
    case SpatialMode::Off: return "off";
    case SpatialMode::Laplace: return "laplace";
    case SpatialMode::Proportional: return "prop";
  }
  return "off";
}

SpatialMode parse_spatial_mode(std::string_view name) {
  if (name == "off") return SpatialMode::Off;
  if (name == "laplace") return SpatialMode::Laplace;
  if (name == "prop" || name == "proportional") return SpatialMode::Proportional;
  throw Error(ErrorCode::InvalidConfig, "unknown spatial mode '" + std::string(name) + "'");
}

void RerankConfig::validate() const {
  if (!std::isfinite(sigma) || sigma <= 0.0) throw Error(ErrorCode::InvalidConfig, "sigma must be positive");
  temporal_prior.validate();
  if (spatial.mode == SpatialMode::Laplace && !(std::isfinite(spatial.sigma_s) && spatial.sigma_s > 0.0))
    throw Error(ErrorCode::InvalidConfig, "sigma_s must be positive for the Laplace spatial prior");
  if (frame_mode)
    for (const auto& [cam, fps] : frame_mode->fps_per_camera)
      if (!std::isfinite(fps) || fps <= 0.0)
        throw Error(ErrorCode::InvalidConfig, "fps for camera " + cam + " must be positive");
}

double appearance_likelihood(std::span<const double> x_q, std::span<const double> x_g, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidParameters, "sigma must be positive");
  return std::exp(-squared_euclidean(x_q, x_g) / (2.0 * sigma * sigma));
}

double spatial_prior(double delta_s_m, double sigma_s) {
  if (!(sigma_s > 0.0)) throw Error(ErrorCode::InvalidParameters, "sigma_s must be positive");
  return std::exp(-std::abs(delta_s_m) / sigma_s);
}

double spatial_prior_proportional(double delta_s_m) { return delta_s_m; }

double frame_mode_log_prior(const ImageRecord& q, const ImageRecord& g, const FrameModeConfig& frame_mode,
                            const PriorSpec& prior) {
  if (q.camera_id != g.camera_id) return 0.0;
  const auto it = frame_mode.fps_per_camera.find(q.camera_id);
  if (it == frame_mode.fps_per_camera.end())
    throw Error(ErrorCode::MissingFps, "no fps configured for camera " + q.camera_id);
  const double frames = static_cast<double>(std::llabs(g.frame_number - q.frame_number));
  return log_pdf(prior, frames / it->second / 60.0);
}

LogPosteriorMatrix posterior_log_scores(const Dataset& dataset, const RerankConfig& config,
                                        const ValidityMask& mask, const CameraTopology* topology,
                                        unsigned threads) {
  config.validate();
  if (mask.rows != dataset.num_queries() || mask.cols != dataset.num_gallery())
    throw Error(ErrorCode::DimensionMismatch, "mask shape does not match dataset");
  if (!dataset.all_features_present()) throw Error(ErrorCode::MissingFeature, "re-ranking needs every feature");
  const bool spatial_on = config.spatial.mode != SpatialMode::Off;
  if (spatial_on && !topology) throw Error(ErrorCode::InvalidConfig, "spatial prior needs a camera topology");
  if (config.frame_mode) {
    for (const auto* side : {&dataset.queries(), &dataset.gallery()})
      for (const auto& r : *side)
        if (!config.frame_mode->fps_per_camera.contains(r.camera_id))
          throw Error(ErrorCode::MissingFps, "no fps configured for camera " + r.camera_id);
  }

  LogPosteriorMatrix out;
  out.rows = mask.rows;
  out.cols = mask.cols;
  out.values.assign(out.rows * out.cols, kNegInf);
  const double two_sigma_sq = 2.0 * config.sigma * config.sigma;

  parallel_for(out.rows, threads, [&](std::size_t q) {
    const auto& qr = dataset.queries()[q];
    for (std::size_t g = 0; g < out.cols; ++g) {
      if (!mask.at(q, g)) continue;
      const auto& gr = dataset.gallery()[g];
      double temporal = config.frame_mode ? frame_mode_log_prior(qr, gr, *config.frame_mode, config.temporal_prior)
                                          : log_pdf(config.temporal_prior, delta_t_minutes(qr, gr));
      // A density pole (e.g. gamma a < 1 at its boundary) outranks every
      // finite score; among such pairs appearance decides.
      if (temporal == std::numeric_limits<double>::infinity()) temporal = std::numeric_limits<double>::max();
      const double spatial =
          spatial_on ? log_spatial_factor(config.spatial, delta_s_meters(qr, gr, *topology)) : 0.0;
      const double appearance = -squared_euclidean(*qr.feature, *gr.feature) / two_sigma_sq;
      if (temporal == kNegInf || spatial == kNegInf) continue;
      out.values[q * out.cols + g] = appearance + temporal + spatial;
    }
  });
  return out;
}

PosteriorMatrix to_linear(const LogPosteriorMatrix& log_scores) {
  PosteriorMatrix out;
  out.rows = log_scores.rows;
  out.cols = log_scores.cols;
  out.values.resize(log_scores.values.size());
  std::transform(log_scores.values.begin(), log_scores.values.end(), out.values.begin(), [](double v) {
    const double e = std::exp(v);
    return std::isinf(e) ? std::numeric_limits<double>::max() : e;
  });
  return out;
}

PosteriorMatrix posterior_scores(const Dataset& dataset, const RerankConfig& config, const ValidityMask& mask,
                                 const CameraTopology* topology, unsigned threads) {
  return to_linear(posterior_log_scores(dataset, config, mask, topology, threads));
}

std::vector<Ranking> order_by_posterior(const LogPosteriorMatrix& log_scores, const DistanceMatrix& appearance,
                                        const ValidityMask& mask, unsigned threads) {
  if (log_scores.rows != mask.rows || log_scores.cols != mask.cols || appearance.rows != mask.rows ||
      appearance.cols != mask.cols)
    throw Error(ErrorCode::DimensionMismatch, "score, distance and mask shapes differ");
  std::vector<Ranking> out(mask.rows);
  parallel_for(mask.rows, threads, [&](std::size_t q) {
    auto& r = out[q];
    for (std::size_t g = 0; g < mask.cols; ++g)
      if (mask.at(q, g)) r.push_back(g);
    std::sort(r.begin(), r.end(), [&](std::size_t a, std::size_t b) {
      const double sa = log_scores.at(q, a), sb = log_scores.at(q, b);
      const bool pa = sa > kNegInf, pb = sb > kNegInf;
      if (pa != pb) return pa;
      if (pa && sa != sb) return sa > sb;
      const double da = appearance.at(q, a), db = appearance.at(q, b);
      if (da != db) return da < db;
      return a < b;
    });
  });
  return out;
}

RerankResult rerank(const Dataset& dataset, const RerankConfig& config, const std::optional<TimeWindow>& window,
                    const CameraTopology* topology, unsigned threads) {
  RerankResult result;
  result.mask = window ? reduce_gallery(dataset, *window) : exclusion_mask(dataset);
  result.appearance = compute_distances(dataset, Metric::Euclidean, threads);
  result.log_scores = posterior_log_scores(dataset, config, result.mask, topology, threads);
  result.rankings = order_by_posterior(result.log_scores, result.appearance, result.mask, threads);
  return result;
}

RerankResult rerank_frames_tr(const Dataset& dataset, const FrameModeConfig& frame_mode, double sigma,
                              const PriorSpec& prior, const std::optional<TimeWindow>& window, unsigned threads) {
  RerankConfig config;
  config.sigma = sigma;
  config.temporal_prior = prior;
  config.frame_mode = frame_mode;
  return rerank(dataset, config, window, nullptr, threads);
}

}  // namespace reid
