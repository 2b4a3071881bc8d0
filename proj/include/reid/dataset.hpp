#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace reid {

/// One detection. Metadata is encoded in the image filename as
/// `<pid>_c<cam>_t<secs>_frame<frame>_<bbox>.jpg`, e.g.
/// `21_c0900_t36000_frame0002300_2.jpg`.
struct ImageRecord {
  std::uint64_t person_id = 0;
  std::string camera_id;  // lowercase, "c" + digits, leading zeros kept
  std::int64_t timestamp_sec = 0;  // seconds since midnight
  std::int64_t frame_number = 0;
  std::int64_t bbox_index = 0;
  std::optional<std::vector<double>> feature;

  bool has_feature() const { return feature.has_value(); }

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// Lowercases and checks the `c[0-9]+` shape. Throws MalformedFilename.
std::string normalize_camera_id(std::string_view token);
bool is_valid_camera_id(std::string_view token);

/// Parses the metadata fields of a filename; the feature is left empty.
/// Accepts an optional `.jpg` or `.png` extension.
ImageRecord parse_image_filename(std::string_view name);

/// Inverse of parse_image_filename. The frame number is zero-padded to
/// `frame_width` digits.
std::string format_image_filename(const ImageRecord& rec, int frame_width = 7,
                                  std::string_view extension = ".jpg");

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t dimension, std::vector<ImageRecord> queries,
          std::vector<ImageRecord> gallery);

  std::size_t dimension() const { return dimension_; }
  const std::vector<ImageRecord>& queries() const { return queries_; }
  const std::vector<ImageRecord>& gallery() const { return gallery_; }
  std::size_t num_queries() const { return queries_.size(); }
  std::size_t num_gallery() const { return gallery_.size(); }

  bool all_features_present() const;

  // Throws if either side is empty.
  void require_non_empty() const;

 private:
  std::size_t dimension_ = 0;
  std::vector<ImageRecord> queries_;
  std::vector<ImageRecord> gallery_;
};

/// Symmetric walking-distance table (meters) over camera ids.
class CameraTopology {
 public:
  CameraTopology() = default;
  CameraTopology(std::vector<std::string> camera_ids, std::vector<double> distances_m);

  const std::vector<std::string>& camera_ids() const { return camera_ids_; }
  std::size_t size() const { return camera_ids_.size(); }
  double at(std::size_t i, std::size_t j) const { return distances_[i * camera_ids_.size() + j]; }
  std::optional<std::size_t> index_of(std::string_view camera_id) const;
  bool contains(std::string_view camera_id) const { return index_of(camera_id).has_value(); }

  /// Throws UnknownCamera. Lookup is case-insensitive.
  double walking_distance(std::string_view a, std::string_view b) const;

 private:
  std::vector<std::string> camera_ids_;
  std::vector<double> distances_;
};

double walking_distance(const CameraTopology& topo, std::string_view a, std::string_view b);

/// Walking distances of the five-camera airport transfer level
/// (c0900 query camera; c0902, c0903, c0904, c0926 gallery cameras).
CameraTopology daa_walking_topology();

struct Manifest {
  std::vector<std::string> queries;
  std::vector<std::string> gallery;
};

Manifest parse_manifest(std::string_view text);
Manifest read_manifest(const std::filesystem::path& path);
std::string format_manifest(const Manifest& manifest);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

CameraTopology parse_topology_csv(std::string_view text);
CameraTopology read_topology_csv(const std::filesystem::path& path);
std::string format_topology_csv(const CameraTopology& topo);
void write_topology_csv(const std::filesystem::path& path, const CameraTopology& topo);

/// Loads a manifest and a features file (binary RIDF or CSV, detected by
/// content) into a Dataset. Manifest order is preserved.
Dataset load_dataset(const std::filesystem::path& manifest_path,
                     const std::filesystem::path& features_path);

}  // namespace reid
