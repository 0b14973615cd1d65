#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

namespace dialect {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

// 64-bit FNV-1a. Used for vocabulary, config, and data fingerprints.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t hash = kFnvOffset);

// Fixed-width lowercase hex, 16 characters.
std::string hex64(std::uint64_t value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// hex64 of the FNV-1a digest of the file's bytes.
std::string hash_file(const std::filesystem::path& path);

// Opens a file for reading; throws ConfigError naming the path on failure.
std::ifstream open_input(const std::filesystem::path& path);

// Shortest round-trip decimal for doubles, so text outputs are reproducible.
std::string format_double(double value);

// Fixed-point with the given number of decimals, for human-facing tables.
std::string format_fixed(double value, int decimals);

}  // namespace dialect
