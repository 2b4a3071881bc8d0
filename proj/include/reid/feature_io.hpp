#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace reid {

struct FeatureEntry {
  std::string name;
  std::vector<float> values;
};

/// In-memory form of a features file. Entry order is file order.
struct FeatureTable {
  std::size_t dimension = 0;
  std::vector<FeatureEntry> entries;
};

// Binary layout: "RIDF", u32 version (=1), u32 count, u32 dimension, then per
// record u16 name length, name bytes, dimension x f32. All little-endian.
inline constexpr char kFeatureMagic[4] = {'R', 'I', 'D', 'F'};
inline constexpr std::uint32_t kFeatureVersion = 1;

std::string encode_features_binary(const FeatureTable& table);
FeatureTable decode_features_binary(std::string_view bytes);

// CSV layout: header `filename,f0,...,f{d-1}`, one row per record.
std::string encode_features_csv(const FeatureTable& table);
FeatureTable decode_features_csv(std::string_view text);

/// Reads either format, sniffing the magic bytes.
FeatureTable read_features(const std::filesystem::path& path);
void write_features_binary(const std::filesystem::path& path, const FeatureTable& table);
void write_features_csv(const std::filesystem::path& path, const FeatureTable& table);

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace reid
