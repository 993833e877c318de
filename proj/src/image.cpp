#include "mexpr/image.hpp"

#include <algorithm>
#include <string>

#include "mexpr/error.hpp"

namespace mexpr {

namespace {

void check_shape(int width, int height, int channels) {
  if (width < 1 || height < 1) {
    fail(ErrorCode::kInvalidArgument, "raster dimensions must be positive");
  }
  if (channels != 1 && channels != 3) {
    fail(ErrorCode::kInvalidArgument, "raster must have 1 or 3 channels, got " + std::to_string(channels));
  }
}

}  // namespace

RasterImage::RasterImage(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_shape(width, height, channels);
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    fail(ErrorCode::kInvalidArgument, "raster data length does not match dimensions");
  }
}

RasterImage copy_region(const RasterImage& image, int x, int y, int width, int height) {
  if (x < 0 || y < 0 || width < 1 || height < 1 || x + width > image.width() ||
      y + height > image.height()) {
    fail(ErrorCode::kSpecOutOfBounds, "region exceeds image bounds");
  }
  RasterImage out(width, height, image.channels());
  const std::size_t run = static_cast<std::size_t>(width) * image.channels();
  for (int r = 0; r < height; ++r) {
    auto src = image.row(y + r).subspan(static_cast<std::size_t>(x) * image.channels(), run);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

RasterImage to_rgb(const RasterImage& image) {
  if (image.channels() == 3) return image;
  RasterImage out(image.width(), image.height(), 3);
  auto src = image.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
  }
  return out;
}

}  // namespace mexpr
