#pragma once

// Data-parallel pixel kernels. Each kernel has an OpenMP implementation in
// mexpr::kernels and a plain serial twin in mexpr::reference; the two must
// agree bit for bit (tests/test_kernels.cpp, bench/bench_kernels.cpp).

#include <cstdint>
#include <span>
#include <vector>

#include "mexpr/image.hpp"

namespace mexpr {

struct ImageView {
  std::span<const std::uint8_t> data;  // starts at the first pixel of the view
  int width = 0;
  int height = 0;
  int channels = 0;
  std::size_t stride = 0;  // bytes between rows

  const std::uint8_t* row(int y) const { return data.data() + static_cast<std::size_t>(y) * stride; }
};

struct MutableImageView {
  std::span<std::uint8_t> data;
  int width = 0;
  int height = 0;
  int channels = 0;
  std::size_t stride = 0;

  std::uint8_t* row(int y) const { return data.data() + static_cast<std::size_t>(y) * stride; }
};

ImageView view(const RasterImage& image);
ImageView view(const RasterImage& image, int x, int y, int width, int height);
MutableImageView mutable_view(RasterImage& image);
MutableImageView mutable_view(RasterImage& image, int x, int y, int width, int height);

// Rounds half away from zero and saturates to [0, 255].
inline std::uint8_t round_to_u8(double v) {
  if (v <= 0.0) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(v + 0.5);
}

// Blend weight of a pasted face at `depth` pixels in from the square's edge.
inline double feather_weight(int depth, int feather_width) {
  if (depth >= feather_width) return 1.0;
  return static_cast<double>(depth + 1) / static_cast<double>(feather_width + 1);
}

namespace kernels {

// Bilinear resample with pixel-center alignment and edge clamping.
// src and dst must have the same channel count.
void resize_bilinear(const ImageView& src, const MutableImageView& dst);

// Writes `face` (3 channels) over `dst` (1 or 3 channels, same width/height).
// Gray destinations take channel 0. feather_width > 0 ramps the face weight
// linearly over the outermost feather_width pixels.
void paste(const ImageView& face, const MutableImageView& dst, int feather_width);

// Per-channel sum of |a - b| over two equally shaped views.
std::vector<std::uint64_t> abs_diff_sum(const ImageView& a, const ImageView& b);

}  // namespace kernels

namespace reference {

void resize_bilinear(const ImageView& src, const MutableImageView& dst);
void paste(const ImageView& face, const MutableImageView& dst, int feather_width);
std::vector<std::uint64_t> abs_diff_sum(const ImageView& a, const ImageView& b);

}  // namespace reference

}  // namespace mexpr
