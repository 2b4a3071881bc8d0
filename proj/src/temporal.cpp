#include "reid/temporal.hpp"

#include <cmath>
#include <limits>

#include "reid/errors.hpp"
#include "text_util.hpp"

namespace reid {
namespace {

// Smallest integer second s with s >= minutes * 60, saturated for infinite
// bounds. Integer offsets s satisfy s >= x  <=>  s >= ceil(x), and
// s < x  <=>  s < ceil(x).
std::int64_t ceil_seconds(double minutes) {
  constexpr double kLimit = 9.0e15;
  const double sec = minutes * 60.0;
  if (sec <= -kLimit) return std::numeric_limits<std::int64_t>::min();
  if (sec >= kLimit) return std::numeric_limits<std::int64_t>::max();
  return static_cast<std::int64_t>(std::ceil(sec));
}

std::string format_bound(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  return detail::format_g17(v);
}

}  // namespace

TimeWindow::TimeWindow(double t_min, double t_max) : t_min_minutes(t_min), t_max_minutes(t_max) {
  if (std::isnan(t_min) || std::isnan(t_max) || !(t_min < t_max))
    throw Error(ErrorCode::InvalidConfig, "time window requires t_min < t_max");
}

TimeWindow TimeWindow::unbounded() {
  return TimeWindow(-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
}

bool TimeWindow::admits(std::int64_t query_sec, std::int64_t gallery_sec) const {
  const std::int64_t offset = gallery_sec - query_sec;
  const auto lo = ceil_seconds(t_min_minutes);
  const auto hi = ceil_seconds(t_max_minutes);
  const bool above = std::isinf(t_min_minutes) ? t_min_minutes < 0 : offset >= lo;
  const bool below = std::isinf(t_max_minutes) ? t_max_minutes > 0 : offset < hi;
  return above && below;
}

std::string TimeWindow::label() const {
  return "window[" + format_bound(t_min_minutes) + "," + format_bound(t_max_minutes) + ")";
}

TimeWindow parse_time_window(std::string_view text) {
  const auto parts = detail::split(text, ':');
  if (parts.size() != 2) throw Error(ErrorCode::InvalidConfig, "window must be MIN:MAX");
  auto bound = [](std::string_view s) {
    s = detail::trim(s);
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    try {
      return detail::parse_double(s);
    } catch (const Error&) {
      throw Error(ErrorCode::InvalidConfig, "bad window bound '" + std::string(s) + "'");
    }
  };
  return TimeWindow(bound(parts[0]), bound(parts[1]));
}

ValidityMask reduce_gallery(const Dataset& dataset, const TimeWindow& window) {
  auto mask = exclusion_mask(dataset);
  for (std::size_t q = 0; q < mask.rows; ++q) {
    const auto tq = dataset.queries()[q].timestamp_sec;
    for (std::size_t g = 0; g < mask.cols; ++g)
      if (!window.admits(tq, dataset.gallery()[g].timestamp_sec)) mask.set(q, g, false);
  }
  mask.provenance += "+" + window.label();
  return mask;
}

double delta_t_minutes(const ImageRecord& q, const ImageRecord& g) {
  return static_cast<double>(g.timestamp_sec - q.timestamp_sec) / 60.0;
}

double delta_s_meters(const ImageRecord& q, const ImageRecord& g, const CameraTopology& topo) {
  return topo.walking_distance(q.camera_id, g.camera_id);
}

std::vector<DeltaSample> empirical_delta_t(const Dataset& dataset) {
  std::vector<DeltaSample> out;
  for (std::size_t q = 0; q < dataset.num_queries(); ++q) {
    const auto& qr = dataset.queries()[q];
    for (std::size_t g = 0; g < dataset.num_gallery(); ++g) {
      const auto& gr = dataset.gallery()[g];
      if (gr.person_id != qr.person_id || gr.camera_id == qr.camera_id) continue;
      out.push_back({delta_t_minutes(qr, gr), qr.camera_id, gr.camera_id, true, q, g});
    }
  }
  if (out.empty()) throw Error(ErrorCode::NoMatchedPairs, "no cross-camera matched pairs in dataset");
  return out;
}

std::vector<double> delta_values(const std::vector<DeltaSample>& samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.delta_t_minutes);
  return out;
}

}  // namespace reid
