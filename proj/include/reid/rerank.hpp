#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reid/dataset.hpp"
#include "reid/metrics.hpp"
#include "reid/priors.hpp"
#include "reid/temporal.hpp"

namespace reid {

enum class SpatialMode { Off, Laplace, Proportional };

std::string spatial_mode_name(SpatialMode m);
SpatialMode parse_spatial_mode(std::string_view name);

struct SpatialConfig {
  SpatialMode mode = SpatialMode::Off;
  double sigma_s = 100.0;  // meters, Laplace mode only
};

/// Within-camera temporal information from frame numbers only. Cross-camera
/// pairs get a temporal factor of exactly 1.
struct FrameModeConfig {
  std::map<std::string, double> fps_per_camera;
};

struct RerankConfig {
  double sigma = 1.0;  // std of the appearance Gaussian, feature units
  PriorSpec temporal_prior = PriorSpec::gamma(2.0, 0.0, 5.0);  // over minutes
  SpatialConfig spatial;
  std::optional<FrameModeConfig> frame_mode;

  void validate() const;
};

/// exp(-|x_q - x_g|^2 / (2 sigma^2)).
double appearance_likelihood(std::span<const double> x_q, std::span<const double> x_g, double sigma);

/// exp(-|delta_s| / sigma_s).
double spatial_prior(double delta_s_m, double sigma_s);

/// Unnormalized prior proportional to the walking distance itself.
double spatial_prior_proportional(double delta_s_m);

/// Row-major |Q| x |G| log posterior scores; -infinity marks a zero score
/// (masked pair or a zero prior factor).
struct LogPosteriorMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t q, std::size_t g) const { return values[q * cols + g]; }
};

/// Unnormalized linear-domain scores exp(log score); +infinity is clamped to
/// the largest finite double.
struct PosteriorMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t q, std::size_t g) const { return values[q * cols + g]; }
};

/// appearance * temporal prior * spatial factor, evaluated in log space.
/// Needs topology when the spatial prior is on. In frame mode the temporal
/// gap comes from frame numbers instead of timestamps.
LogPosteriorMatrix posterior_log_scores(const Dataset& dataset, const RerankConfig& config,
                                        const ValidityMask& mask, const CameraTopology* topology = nullptr,
                                        unsigned threads = 1);

PosteriorMatrix posterior_scores(const Dataset& dataset, const RerankConfig& config, const ValidityMask& mask,
                                 const CameraTopology* topology = nullptr, unsigned threads = 1);

PosteriorMatrix to_linear(const LogPosteriorMatrix& log_scores);

/// Orders valid gallery items: positive scores by score descending, then
/// zero-score items; ties and the zero-score tail go by appearance distance,
/// then gallery index.
std::vector<Ranking> order_by_posterior(const LogPosteriorMatrix& log_scores, const DistanceMatrix& appearance,
                                        const ValidityMask& mask, unsigned threads = 1);

struct RerankResult {
  std::vector<Ranking> rankings;
  LogPosteriorMatrix log_scores;
  DistanceMatrix appearance;
  ValidityMask mask;
};

/// Posterior re-ranking over the exclusion mask, further restricted to
/// `window` when one is given.
RerankResult rerank(const Dataset& dataset, const RerankConfig& config,
                    const std::optional<TimeWindow>& window = std::nullopt,
                    const CameraTopology* topology = nullptr, unsigned threads = 1);

/// Frame-number ("TR") variant: same-camera gaps |frame_g - frame_q| / fps
/// feed the temporal prior, cross-camera pairs get factor 1. Throws MissingFps.
RerankResult rerank_frames_tr(const Dataset& dataset, const FrameModeConfig& frame_mode, double sigma,
                              const PriorSpec& prior, const std::optional<TimeWindow>& window = std::nullopt,
                              unsigned threads = 1);

/// Per-pair temporal log factor in frame mode; exposed for testing.
double frame_mode_log_prior(const ImageRecord& q, const ImageRecord& g, const FrameModeConfig& frame_mode,
                            const PriorSpec& prior);

}  // namespace reid
