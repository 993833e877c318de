#include "mexpr/codec.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <cstring>
#include <fstream>
#include <iterator>

#include "mexpr/error.hpp"

namespace mexpr {

RasterImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (bytes.empty() || !png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    fail(ErrorCode::kUnreadableMedia, std::string("cannot read PNG header: ") + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  const auto width = static_cast<int>(image.width);
  const auto height = static_cast<int>(image.height);
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(image));
  // Paper white behind any transparency.
  png_color background{255, 255, 255};
  if (!png_image_finish_read(&image, &background, data.data(), 0, nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    fail(ErrorCode::kUnreadableMedia, "cannot decode PNG: " + message);
  }
  return RasterImage(width, height, channels, std::move(data));
}

Bytes encode_png(const RasterImage& raster) {
  if (raster.empty()) fail(ErrorCode::kInvalidArgument, "cannot encode an empty raster");
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width());
  image.height = static_cast<png_uint_32>(raster.height());
  image.format = raster.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, raster.data().data(), 0, nullptr)) {
    fail(ErrorCode::kIOFailure, std::string("PNG sizing failed: ") + image.message);
  }
  Bytes out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raster.data().data(), 0, nullptr)) {
    fail(ErrorCode::kIOFailure, std::string("PNG encoding failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kUnreadableMedia, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIOFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIOFailure, "short write to " + path.string());
}

RasterImage read_png(const std::filesystem::path& path) {
  try {
    return decode_png(read_file(path));
  } catch (const Error& e) {
    fail(ErrorCode::kUnreadableMedia, path.string() + ": " + e.what());
  }
}

void write_png(const std::filesystem::path& path, const RasterImage& image) {
  write_file(path, encode_png(image));
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::kIOFailure, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Bytes base64_decode(std::string_view text) {
  std::string clean;
  clean.reserve(text.size());
  for (char c : text) {
    if (c != '\n' && c != '\r' && c != ' ' && c != '\t') clean.push_back(c);
  }
  if (clean.size() % 4 != 0) fail(ErrorCode::kInvalidArgument, "base64 length is not a multiple of 4");
  Bytes out(3 * clean.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                static_cast<int>(clean.size()));
  if (n < 0) fail(ErrorCode::kInvalidArgument, "malformed base64");
  std::size_t padding = 0;
  if (!clean.empty() && clean.back() == '=') ++padding;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

}  // namespace mexpr
