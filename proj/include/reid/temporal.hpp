#pragma once

#include <string>
#include <vector>

#include "reid/dataset.hpp"
#include "reid/metrics.hpp"

namespace reid {

/// Half-open gallery window in minutes relative to the query time:
/// t_q + t_min <= t_g < t_q + t_max. Bounds may be infinite.
struct TimeWindow {
  double t_min_minutes = 0.0;
  double t_max_minutes = 30.0;

  TimeWindow() = default;
  TimeWindow(double t_min, double t_max);

  static TimeWindow unbounded();

  /// Exact integer-second test of the window rule.
  bool admits(std::int64_t query_sec, std::int64_t gallery_sec) const;
  std::string label() const;
};

/// Parses "MIN:MAX" (minutes), e.g. "0:30" or "-inf:inf".
TimeWindow parse_time_window(std::string_view text);

/// Exclusion mask intersected with the time window.
ValidityMask reduce_gallery(const Dataset& dataset, const TimeWindow& window);

/// Signed (t_g - t_q) in minutes.
double delta_t_minutes(const ImageRecord& q, const ImageRecord& g);

double delta_s_meters(const ImageRecord& q, const ImageRecord& g, const CameraTopology& topo);

struct DeltaSample {
  double delta_t_minutes = 0.0;
  std::string query_cam;
  std::string gallery_cam;
  bool same_identity = true;
  std::size_t query_index = 0;
  std::size_t gallery_index = 0;
};

/// One sample per (query, gallery) pair with equal person id and different
/// cameras. Throws NoMatchedPairs when there is none.
std::vector<DeltaSample> empirical_delta_t(const Dataset& dataset);

std::vector<double> delta_values(const std::vector<DeltaSample>& samples);

}  // namespace reid
