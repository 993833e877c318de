#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mexpr/image.hpp"

namespace mexpr {

using Bytes = std::vector<std::uint8_t>;

// Decodes any PNG into gray (if the file has no color) or RGB; alpha is
// composited away. Throws UnreadableMedia.
RasterImage decode_png(std::span<const std::uint8_t> bytes);

// Deterministic encoder: the same raster always yields the same bytes.
Bytes encode_png(const RasterImage& image);

RasterImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RasterImage& image);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);
Bytes base64_decode(std::string_view text);

}  // namespace mexpr
