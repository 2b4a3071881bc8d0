#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace reid {

// 64-bit FNV-1a. Stable across platforms; used for config and file digests,
// not for anything security related.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(std::uint64_t value);

std::string digest_string(std::string_view bytes);
std::string digest_file(const std::filesystem::path& path);

}  // namespace reid
