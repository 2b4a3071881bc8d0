#include "reid/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "reid/errors.hpp"
#include "reid/feature_io.hpp"
#include "text_util.hpp"

namespace reid {
namespace {

[[noreturn]] void malformed(std::string_view name, const std::string& why) {
  throw Error(ErrorCode::MalformedFilename,
              "malformed image filename '" + std::string(name) + "': " + why);
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

template <typename Int>
Int parse_digits(std::string_view name, std::string_view digits, const char* field) {
  if (!all_digits(digits)) malformed(name, std::string(field) + " is not a base-10 integer");
  Int v{};
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc() || ptr != digits.data() + digits.size())
    malformed(name, std::string(field) + " out of range");
  return v;
}

std::string_view strip_prefix(std::string_view name, std::string_view token, std::string_view prefix,
                              const char* field) {
  if (token.substr(0, prefix.size()) != prefix)
    malformed(name, std::string(field) + " must start with '" + std::string(prefix) + "'");
  return token.substr(prefix.size());
}

std::string_view strip_extension(std::string_view token) {
  for (std::string_view ext : {".jpg", ".png", ".JPG", ".PNG"}) {
    if (token.size() > ext.size() && token.substr(token.size() - ext.size()) == ext)
      return token.substr(0, token.size() - ext.size());
  }
  return token;
}

}  // namespace

bool is_valid_camera_id(std::string_view token) {
  return token.size() >= 2 && (token[0] == 'c' || token[0] == 'C') && all_digits(token.substr(1));
}

std::string normalize_camera_id(std::string_view token) {
  if (!is_valid_camera_id(token))
    throw Error(ErrorCode::MalformedFilename, "invalid camera id '" + std::string(token) + "'");
  return detail::lowercase(token);
}

ImageRecord parse_image_filename(std::string_view name) {
  const auto tokens = detail::split(name, '_');
  if (tokens.size() != 5)
    malformed(name, "expected 5 '_'-separated tokens, got " + std::to_string(tokens.size()));

  ImageRecord rec;
  rec.person_id = parse_digits<std::uint64_t>(name, tokens[0], "person id");
  if (!is_valid_camera_id(tokens[1])) malformed(name, "camera token must be 'c' followed by digits");
  rec.camera_id = detail::lowercase(tokens[1]);
  rec.timestamp_sec = parse_digits<std::int64_t>(name, strip_prefix(name, tokens[2], "t", "timestamp"),
                                                 "timestamp");
  rec.frame_number = parse_digits<std::int64_t>(
      name, strip_prefix(name, tokens[3], "frame", "frame number"), "frame number");
  rec.bbox_index = parse_digits<std::int64_t>(name, strip_extension(tokens[4]), "bbox index");
  return rec;
}

std::string format_image_filename(const ImageRecord& rec, int frame_width, std::string_view extension) {
  if (rec.timestamp_sec < 0 || rec.frame_number < 0 || rec.bbox_index < 0)
    throw Error(ErrorCode::InvalidParameters, "negative field in image record");
  auto frame = std::to_string(rec.frame_number);
  if (frame_width < 0 || frame.size() > static_cast<std::size_t>(frame_width))
    throw Error(ErrorCode::InvalidParameters,
                "frame number " + frame + " does not fit width " + std::to_string(frame_width));
  frame.insert(0, static_cast<std::size_t>(frame_width) - frame.size(), '0');
  std::string out = std::to_string(rec.person_id);
  out += '_';
  out += normalize_camera_id(rec.camera_id);
  out += "_t" + std::to_string(rec.timestamp_sec);
  out += "_frame" + frame;
  out += '_' + std::to_string(rec.bbox_index);
  out += extension;
  return out;
}

Dataset::Dataset(std::size_t dimension, std::vector<ImageRecord> queries, std::vector<ImageRecord> gallery)
    : dimension_(dimension), queries_(std::move(queries)), gallery_(std::move(gallery)) {
  if (dimension_ == 0) throw Error(ErrorCode::DimensionMismatch, "dataset dimension must be positive");
  for (const auto* side : {&queries_, &gallery_}) {
    for (const auto& rec : *side) {
      if (!is_valid_camera_id(rec.camera_id))
        throw Error(ErrorCode::MalformedFilename, "invalid camera id '" + rec.camera_id + "'");
      if (!rec.feature) continue;
      if (rec.feature->size() != dimension_)
        throw Error(ErrorCode::DimensionMismatch,
                    "feature of length " + std::to_string(rec.feature->size()) + " in dataset of dimension " +
                        std::to_string(dimension_));
      for (double v : *rec.feature)
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeature, "non-finite feature value");
    }
  }
}

bool Dataset::all_features_present() const {
  auto has = [](const ImageRecord& r) { return r.has_feature(); };
  return std::all_of(queries_.begin(), queries_.end(), has) &&
         std::all_of(gallery_.begin(), gallery_.end(), has);
}

void Dataset::require_non_empty() const {
  if (queries_.empty()) throw Error(ErrorCode::InvalidConfig, "dataset has no queries");
  if (gallery_.empty()) throw Error(ErrorCode::InvalidConfig, "dataset has no gallery items");
}

CameraTopology::CameraTopology(std::vector<std::string> camera_ids, std::vector<double> distances_m)
    : camera_ids_(std::move(camera_ids)), distances_(std::move(distances_m)) {
  const auto n = camera_ids_.size();
  if (distances_.size() != n * n)
    throw Error(ErrorCode::InvalidTopology, "distance matrix is not square over the camera ids");
  std::unordered_set<std::string> seen;
  for (auto& id : camera_ids_) {
    if (!is_valid_camera_id(id)) throw Error(ErrorCode::InvalidTopology, "invalid camera id '" + id + "'");
    id = detail::lowercase(id);
    if (!seen.insert(id).second) throw Error(ErrorCode::InvalidTopology, "duplicate camera id '" + id + "'");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (at(i, i) != 0.0) throw Error(ErrorCode::InvalidTopology, "non-zero diagonal at " + camera_ids_[i]);
    for (std::size_t j = 0; j < n; ++j) {
      const double d = at(i, j);
      if (!std::isfinite(d) || d < 0.0)
        throw Error(ErrorCode::InvalidTopology, "distances must be finite and non-negative");
      if (std::abs(d - at(j, i)) > 1e-9)
        throw Error(ErrorCode::InvalidTopology,
                    "distance matrix not symmetric between " + camera_ids_[i] + " and " + camera_ids_[j]);
    }
  }
}

std::optional<std::size_t> CameraTopology::index_of(std::string_view camera_id) const {
  const auto key = detail::lowercase(camera_id);
  for (std::size_t i = 0; i < camera_ids_.size(); ++i)
    if (camera_ids_[i] == key) return i;
  return std::nullopt;
}

double CameraTopology::walking_distance(std::string_view a, std::string_view b) const {
  const auto ia = index_of(a);
  const auto ib = index_of(b);
  if (!ia) throw Error(ErrorCode::UnknownCamera, "camera '" + std::string(a) + "' not in topology");
  if (!ib) throw Error(ErrorCode::UnknownCamera, "camera '" + std::string(b) + "' not in topology");
  return at(*ia, *ib);
}

double walking_distance(const CameraTopology& topo, std::string_view a, std::string_view b) {
  return topo.walking_distance(a, b);
}

CameraTopology daa_walking_topology() {
  // Upper triangle of the published table; its C904/C926 entry is the only
  // asymmetric one (63.5 vs 57.0) and the upper value is kept.
  return CameraTopology({"c0900", "c0902", "c0903", "c0904", "c0926"},
                        {0.0,   48.5, 106.0, 70.0, 68.0,   //
                         48.5,  0.0,  59.0,  19.0, 38.5,   //
                         106.0, 59.0, 0.0,   45.0, 97.5,   //
                         70.0,  19.0, 45.0,  0.0,  63.5,   //
                         68.0,  38.5, 97.5,  63.5, 0.0});
}

Manifest parse_manifest(std::string_view text) {
  Manifest m;
  std::vector<std::string>* section = nullptr;
  std::size_t lineno = 0;
  for (auto raw : detail::split_lines(text)) {
    ++lineno;
    auto line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line == "[query]") {
      section = &m.queries;
    } else if (line == "[gallery]") {
      section = &m.gallery;
    } else if (line.front() == '[') {
      throw Error(ErrorCode::MalformedInput, "unknown manifest section " + std::string(line));
    } else {
      if (!section)
        throw Error(ErrorCode::MalformedInput,
                    "manifest line " + std::to_string(lineno) + " precedes any section header");
      section->emplace_back(line);
    }
  }
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) { return parse_manifest(read_file_bytes(path)); }

std::string format_manifest(const Manifest& manifest) {
  std::string out = "[query]\n";
  for (const auto& n : manifest.queries) out += n + '\n';
  out += "[gallery]\n";
  for (const auto& n : manifest.gallery) out += n + '\n';
  return out;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  write_file_bytes(path, format_manifest(manifest));
}

CameraTopology parse_topology_csv(std::string_view text) {
  std::vector<std::vector<std::string_view>> rows;
  for (auto line : detail::split_lines(text)) {
    line = detail::trim(line);
    if (!line.empty()) rows.push_back(detail::split(line, ','));
  }
  if (rows.empty()) throw Error(ErrorCode::InvalidTopology, "empty topology CSV");
  const auto n = rows[0].size() - 1;
  if (rows.size() != n + 1) throw Error(ErrorCode::InvalidTopology, "topology CSV is not square");
  std::vector<std::string> ids;
  for (std::size_t j = 1; j <= n; ++j) ids.emplace_back(detail::trim(rows[0][j]));
  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = rows[i + 1];
    if (row.size() != n + 1) throw Error(ErrorCode::InvalidTopology, "topology CSV row has wrong width");
    if (detail::lowercase(detail::trim(row[0])) != detail::lowercase(ids[i]))
      throw Error(ErrorCode::InvalidTopology, "row/column camera ids differ at row " + std::to_string(i + 1));
    for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = detail::parse_double(row[j + 1]);
  }
  return CameraTopology(std::move(ids), std::move(dist));
}

CameraTopology read_topology_csv(const std::filesystem::path& path) {
  return parse_topology_csv(read_file_bytes(path));
}

std::string format_topology_csv(const CameraTopology& topo) {
  std::string out = "camera";
  for (const auto& id : topo.camera_ids()) out += ',' + id;
  out += '\n';
  for (std::size_t i = 0; i < topo.size(); ++i) {
    out += topo.camera_ids()[i];
    for (std::size_t j = 0; j < topo.size(); ++j) out += ',' + detail::format_g17(topo.at(i, j));
    out += '\n';
  }
  return out;
}

void write_topology_csv(const std::filesystem::path& path, const CameraTopology& topo) {
  write_file_bytes(path, format_topology_csv(topo));
}

Dataset load_dataset(const std::filesystem::path& manifest_path, const std::filesystem::path& features_path) {
  const auto manifest = read_manifest(manifest_path);
  const auto table = read_features(features_path);

  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < table.entries.size(); ++i) index.emplace(table.entries[i].name, i);

  std::unordered_set<std::string_view> listed;
  auto build = [&](const std::vector<std::string>& names) {
    std::vector<ImageRecord> out;
    out.reserve(names.size());
    for (const auto& name : names) {
      if (!listed.insert(name).second)
        throw Error(ErrorCode::DuplicateFilename, "manifest lists '" + name + "' more than once");
      auto rec = parse_image_filename(name);
      const auto it = index.find(name);
      if (it == index.end()) throw Error(ErrorCode::MissingFeature, "no feature vector for '" + name + "'");
      const auto& values = table.entries[it->second].values;
      rec.feature = std::vector<double>(values.begin(), values.end());
      out.push_back(std::move(rec));
    }
    return out;
  };
  auto queries = build(manifest.queries);
  auto gallery = build(manifest.gallery);
  return Dataset(table.dimension, std::move(queries), std::move(gallery));
}

}  // namespace reid
