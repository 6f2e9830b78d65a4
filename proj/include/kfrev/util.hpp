#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kfrev::util {

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char delimiter);

/// Strict full-field parse; rejects empty text, trailing garbage and non-finite values.
bool parse_double(std::string_view text, double& out);

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

/// FNV-1a 64-bit hash, used as a cheap content fingerprint for input files.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fingerprint_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temporary file and rename so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace kfrev::util
