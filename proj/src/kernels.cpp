#include "mexpr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "mexpr/error.hpp"

namespace mexpr {

ImageView view(const RasterImage& image) {
  return {image.pixels(), image.width(), image.height(), image.channels(), image.stride()};
}

ImageView view(const RasterImage& image, int x, int y, int width, int height) {
  if (x < 0 || y < 0 || width < 1 || height < 1 || x + width > image.width() ||
      y + height > image.height()) {
    fail(ErrorCode::kSpecOutOfBounds, "view exceeds image bounds");
  }
  const std::size_t offset = static_cast<std::size_t>(y) * image.stride() +
                             static_cast<std::size_t>(x) * image.channels();
  return {image.pixels().subspan(offset), width, height, image.channels(), image.stride()};
}

MutableImageView mutable_view(RasterImage& image) {
  return {image.pixels(), image.width(), image.height(), image.channels(), image.stride()};
}

MutableImageView mutable_view(RasterImage& image, int x, int y, int width, int height) {
  if (x < 0 || y < 0 || width < 1 || height < 1 || x + width > image.width() ||
      y + height > image.height()) {
    fail(ErrorCode::kSpecOutOfBounds, "view exceeds image bounds");
  }
  const std::size_t offset = static_cast<std::size_t>(y) * image.stride() +
                             static_cast<std::size_t>(x) * image.channels();
  return {image.pixels().subspan(offset), width, height, image.channels(), image.stride()};
}

namespace {

struct Tap {
  int lo;
  int hi;
  double weight;  // of hi
};

Tap make_tap(int dst_index, double scale, int src_extent) {
  double f = (dst_index + 0.5) * scale - 0.5;
  f = std::clamp(f, 0.0, static_cast<double>(src_extent - 1));
  const int lo = static_cast<int>(std::floor(f));
  const int hi = std::min(lo + 1, src_extent - 1);
  return {lo, hi, f - lo};
}

void check_resize(const ImageView& src, const MutableImageView& dst) {
  if (src.channels != dst.channels) {
    fail(ErrorCode::kInvalidArgument, "resize: channel count mismatch");
  }
}

void check_paste(const ImageView& face, const MutableImageView& dst, int feather_width) {
  if (face.channels != 3 || face.width != dst.width || face.height != dst.height) {
    fail(ErrorCode::kInvalidArgument, "paste: face must be 3-channel and match the destination size");
  }
  if (feather_width < 0) fail(ErrorCode::kInvalidArgument, "feather width must be >= 0");
}

}  // namespace

namespace kernels {

void resize_bilinear(const ImageView& src, const MutableImageView& dst) {
  check_resize(src, dst);
  const double sx = static_cast<double>(src.width) / dst.width;
  const double sy = static_cast<double>(src.height) / dst.height;
  std::vector<Tap> xs(static_cast<std::size_t>(dst.width));
  for (int x = 0; x < dst.width; ++x) xs[x] = make_tap(x, sx, src.width);
  const int ch = src.channels;

#pragma omp parallel for schedule(static)
  for (int y = 0; y < dst.height; ++y) {
    const Tap ty = make_tap(y, sy, src.height);
    const std::uint8_t* r0 = src.row(ty.lo);
    const std::uint8_t* r1 = src.row(ty.hi);
    std::uint8_t* out = dst.row(y);
    for (int x = 0; x < dst.width; ++x) {
      const Tap& tx = xs[x];
      const double wx = tx.weight;
      const double wy = ty.weight;
      for (int c = 0; c < ch; ++c) {
        const double top = (1.0 - wx) * r0[tx.lo * ch + c] + wx * r0[tx.hi * ch + c];
        const double bottom = (1.0 - wx) * r1[tx.lo * ch + c] + wx * r1[tx.hi * ch + c];
        out[x * ch + c] = round_to_u8((1.0 - wy) * top + wy * bottom);
      }
    }
  }
}

void paste(const ImageView& face, const MutableImageView& dst, int feather_width) {
  check_paste(face, dst, feather_width);
  const int w = dst.width;
  const int h = dst.height;
  const int dch = dst.channels;

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* in = face.row(y);
    std::uint8_t* out = dst.row(y);
    const int dy = std::min(y, h - 1 - y);
    for (int x = 0; x < w; ++x) {
      const int depth = std::min(dy, std::min(x, w - 1 - x));
      const double a = feather_weight(depth, feather_width);
      for (int c = 0; c < dch; ++c) {
        const std::uint8_t f = in[x * 3 + c];
        if (a == 1.0) {
          out[x * dch + c] = f;
        } else {
          out[x * dch + c] = round_to_u8(a * f + (1.0 - a) * out[x * dch + c]);
        }
      }
    }
  }
}

std::vector<std::uint64_t> abs_diff_sum(const ImageView& a, const ImageView& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    fail(ErrorCode::kInvalidArgument, "abs_diff_sum: shape mismatch");
  }
  const int ch = a.channels;
  std::uint64_t sums[3] = {0, 0, 0};
  std::uint64_t s0 = 0, s1 = 0, s2 = 0;

#pragma omp parallel for schedule(static) reduction(+ : s0, s1, s2)
  for (int y = 0; y < a.height; ++y) {
    const std::uint8_t* ra = a.row(y);
    const std::uint8_t* rb = b.row(y);
    for (int x = 0; x < a.width; ++x) {
      for (int c = 0; c < ch; ++c) {
        const int d = std::abs(static_cast<int>(ra[x * ch + c]) - static_cast<int>(rb[x * ch + c]));
        if (c == 0) s0 += d;
        else if (c == 1) s1 += d;
        else s2 += d;
      }
    }
  }
  sums[0] = s0;
  sums[1] = s1;
  sums[2] = s2;
  return {sums, sums + ch};
}

}  // namespace kernels

namespace reference {

void resize_bilinear(const ImageView& src, const MutableImageView& dst) {
  check_resize(src, dst);
  const double sx = static_cast<double>(src.width) / dst.width;
  const double sy = static_cast<double>(src.height) / dst.height;
  for (int y = 0; y < dst.height; ++y) {
    for (int x = 0; x < dst.width; ++x) {
      const Tap tx = make_tap(x, sx, src.width);
      const Tap ty = make_tap(y, sy, src.height);
      for (int c = 0; c < src.channels; ++c) {
        auto px = [&](int xx, int yy) -> double { return src.row(yy)[xx * src.channels + c]; };
        const double top = (1.0 - tx.weight) * px(tx.lo, ty.lo) + tx.weight * px(tx.hi, ty.lo);
        const double bottom = (1.0 - tx.weight) * px(tx.lo, ty.hi) + tx.weight * px(tx.hi, ty.hi);
        dst.row(y)[x * dst.channels + c] = round_to_u8((1.0 - ty.weight) * top + ty.weight * bottom);
      }
    }
  }
}

void paste(const ImageView& face, const MutableImageView& dst, int feather_width) {
  check_paste(face, dst, feather_width);
  for (int y = 0; y < dst.height; ++y) {
    for (int x = 0; x < dst.width; ++x) {
      const int depth = std::min({x, y, dst.width - 1 - x, dst.height - 1 - y});
      const double a = feather_weight(depth, feather_width);
      for (int c = 0; c < dst.channels; ++c) {
        std::uint8_t& out = dst.row(y)[x * dst.channels + c];
        const std::uint8_t f = face.row(y)[x * 3 + c];
        out = a == 1.0 ? f : round_to_u8(a * f + (1.0 - a) * out);
      }
    }
  }
}

std::vector<std::uint64_t> abs_diff_sum(const ImageView& a, const ImageView& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    fail(ErrorCode::kInvalidArgument, "abs_diff_sum: shape mismatch");
  }
  std::vector<std::uint64_t> sums(static_cast<std::size_t>(a.channels), 0);
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      for (int c = 0; c < a.channels; ++c) {
        const int va = a.row(y)[x * a.channels + c];
        const int vb = b.row(y)[x * b.channels + c];
        sums[c] += static_cast<std::uint64_t>(std::abs(va - vb));
      }
    }
  }
  return sums;
}

}  // namespace reference

}  // namespace mexpr
