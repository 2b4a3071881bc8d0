#include "reid/feature_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <unordered_set>

#include "reid/errors.hpp"
#include "text_util.hpp"

namespace reid {
namespace {

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint16_t u16() {
    need(2);
    auto v = static_cast<std::uint16_t>(static_cast<unsigned char>(bytes_[pos_]) |
                                        (static_cast<unsigned char>(bytes_[pos_ + 1]) << 8));
    pos_ += 2;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw Error(ErrorCode::MalformedInput, "features file truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void check_entry(const FeatureTable& table, const FeatureEntry& e) {
  if (e.values.size() != table.dimension)
    throw Error(ErrorCode::DimensionMismatch,
                "feature '" + e.name + "' has " + std::to_string(e.values.size()) +
                    " values, expected " + std::to_string(table.dimension));
}

void check_unique(const FeatureTable& table) {
  std::unordered_set<std::string_view> seen;
  for (const auto& e : table.entries)
    if (!seen.insert(e.name).second)
      throw Error(ErrorCode::DuplicateFilename, "duplicate feature entry '" + e.name + "'");
}

}  // namespace

std::string encode_features_binary(const FeatureTable& table) {
  std::string out(kFeatureMagic, 4);
  put_u32(out, kFeatureVersion);
  put_u32(out, static_cast<std::uint32_t>(table.entries.size()));
  put_u32(out, static_cast<std::uint32_t>(table.dimension));
  for (const auto& e : table.entries) {
    check_entry(table, e);
    if (e.name.size() > 0xffff)
      throw Error(ErrorCode::MalformedInput, "feature name too long: " + e.name);
    put_u16(out, static_cast<std::uint16_t>(e.name.size()));
    out.append(e.name);
    for (float v : e.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

FeatureTable decode_features_binary(std::string_view bytes) {
  ByteReader in(bytes);
  if (in.take(4) != std::string_view(kFeatureMagic, 4))
    throw Error(ErrorCode::MalformedInput, "bad features magic");
  const auto version = in.u32();
  if (version != kFeatureVersion)
    throw Error(ErrorCode::MalformedInput, "unsupported features version " + std::to_string(version));
  const auto count = in.u32();
  FeatureTable table;
  table.dimension = in.u32();
  if (table.dimension == 0) throw Error(ErrorCode::DimensionMismatch, "feature dimension is zero");
  table.entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    FeatureEntry e;
    e.name = std::string(in.take(in.u16()));
    e.values.resize(table.dimension);
    for (auto& v : e.values) v = in.f32();
    table.entries.push_back(std::move(e));
  }
  if (!in.done()) throw Error(ErrorCode::MalformedInput, "trailing bytes in features file");
  check_unique(table);
  return table;
}

std::string encode_features_csv(const FeatureTable& table) {
  std::string out = "filename";
  for (std::size_t i = 0; i < table.dimension; ++i) out += ",f" + std::to_string(i);
  out += '\n';
  char buf[32];
  for (const auto& e : table.entries) {
    check_entry(table, e);
    out += e.name;
    for (float v : e.values) {
      std::snprintf(buf, sizeof(buf), ",%.9g", static_cast<double>(v));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

FeatureTable decode_features_csv(std::string_view text) {
  auto lines = detail::split_lines(text);
  std::size_t li = 0;
  while (li < lines.size() && detail::trim(lines[li]).empty()) ++li;
  if (li == lines.size()) throw Error(ErrorCode::MalformedInput, "empty features CSV");
  const auto header = detail::split(detail::trim(lines[li++]), ',');
  if (header.size() < 2 || detail::trim(header[0]) != "filename")
    throw Error(ErrorCode::MalformedInput, "features CSV header must start with 'filename'");
  FeatureTable table;
  table.dimension = header.size() - 1;
  for (; li < lines.size(); ++li) {
    auto line = detail::trim(lines[li]);
    if (line.empty()) continue;
    auto cells = detail::split(line, ',');
    FeatureEntry e;
    e.name = std::string(detail::trim(cells[0]));
    for (std::size_t c = 1; c < cells.size(); ++c)
      e.values.push_back(static_cast<float>(detail::parse_double(cells[c])));
    check_entry(table, e);
    table.entries.push_back(std::move(e));
  }
  check_unique(table);
  return table;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

FeatureTable read_features(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw Error(ErrorCode::MissingFeature, "features file not found: " + path.string());
  const auto bytes = read_file_bytes(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kFeatureMagic, 4) == 0)
    return decode_features_binary(bytes);
  return decode_features_csv(bytes);
}

void write_features_binary(const std::filesystem::path& path, const FeatureTable& table) {
  write_file_bytes(path, encode_features_binary(table));
}

void write_features_csv(const std::filesystem::path& path, const FeatureTable& table) {
  write_file_bytes(path, encode_features_csv(table));
}

}  // namespace reid
