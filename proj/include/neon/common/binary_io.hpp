#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace neon {

/// Sidecar payloads are little-endian IEEE-754 float32, row-major.
void write_f32_le(const std::filesystem::path& path, std::span<const double> values);
std::vector<float> read_f32_le(const std::filesystem::path& path);

void append_f32_le(std::vector<unsigned char>& out, std::span<const double> values);
std::vector<float> decode_f32_le(std::span<const unsigned char> bytes);

}  // namespace neon
