#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mexpr {

// 8-bit, row-major, interleaved raster with 1 (gray) or 3 (RGB) channels.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels, std::uint8_t fill = 0);
  RasterImage(int width, int height, int channels, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t stride() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(channels_);
  }

  std::uint8_t& at(int x, int y, int c) {
    return data_[static_cast<std::size_t>(y) * stride() + static_cast<std::size_t>(x) * channels_ + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data_[static_cast<std::size_t>(y) * stride() + static_cast<std::size_t>(x) * channels_ + c];
  }

  std::span<std::uint8_t> row(int y) { return {data_.data() + y * stride(), stride()}; }
  std::span<const std::uint8_t> row(int y) const { return {data_.data() + y * stride(), stride()}; }

  std::span<std::uint8_t> pixels() noexcept { return data_; }
  std::span<const std::uint8_t> pixels() const noexcept { return data_; }
  const std::vector<std::uint8_t>& data() const noexcept { return data_; }

  bool same_shape(const RasterImage& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

// Copies an axis-aligned window; the window must lie inside the image.
RasterImage copy_region(const RasterImage& image, int x, int y, int width, int height);

// Replicates a gray image into 3 channels; color images are returned unchanged.
RasterImage to_rgb(const RasterImage& image);

}  // namespace mexpr
