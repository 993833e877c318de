#include <random>

#include "doctest.h"
#include "mexpr/kernels.hpp"
#include "support/support.hpp"

using namespace mexpr;
using namespace mexpr::testing;

TEST_CASE("parallel resize is bit-identical to the serial reference") {
  std::mt19937 rng(5);
  const int sizes[][4] = {{512, 512, 64, 64}, {100, 100, 512, 512}, {512, 512, 300, 300},
                          {37, 53, 91, 17}, {1, 1, 8, 8}, {256, 256, 512, 512}};
  for (int channels : {1, 3}) {
    for (const auto& s : sizes) {
      const RasterImage src = noise_image(s[0], s[1], channels, rng);
      RasterImage a(s[2], s[3], channels), b(s[2], s[3], channels);
      kernels::resize_bilinear(view(src), mutable_view(a));
      reference::resize_bilinear(view(src), mutable_view(b));
      REQUIRE(a == b);
    }
  }
}

TEST_CASE("parallel resize agrees with the independent oracle within one level") {
  std::mt19937 rng(6);
  for (int side : {64, 100, 256, 300, 777}) {
    const RasterImage src = noise_image(side, side, 3, rng);
    RasterImage out(512, 512, 3);
    kernels::resize_bilinear(view(src), mutable_view(out));
    const RasterImage expected = oracle_resample(src, 0, 0, side, 512);
    for (std::size_t i = 0; i < out.data().size(); ++i) {
      REQUIRE(std::abs(int(out.data()[i]) - int(expected.data()[i])) <= 1);
    }
  }
}

TEST_CASE("paste matches the reference for every feather width") {
  std::mt19937 rng(8);
  for (int channels : {1, 3}) {
    for (int feather : {0, 1, 5, 20, 70}) {
      const RasterImage face = noise_image(97, 97, 3, rng);
      RasterImage a = noise_image(150, 120, channels, rng);
      RasterImage b = a;
      kernels::paste(view(face), mutable_view(a, 10, 11, 97, 97), feather);
      reference::paste(view(face), mutable_view(b, 10, 11, 97, 97), feather);
      REQUIRE(a == b);
    }
  }
}

TEST_CASE("abs_diff_sum matches the reference") {
  std::mt19937 rng(9);
  for (int channels : {1, 3}) {
    const RasterImage a = noise_image(64, 40, channels, rng);
    const RasterImage b = noise_image(64, 40, channels, rng);
    CHECK(kernels::abs_diff_sum(view(a, 3, 4, 50, 30), view(b, 3, 4, 50, 30)) ==
          reference::abs_diff_sum(view(a, 3, 4, 50, 30), view(b, 3, 4, 50, 30)));
  }
}

TEST_CASE("feather weight rises monotonically and reaches 1 at depth w") {
  for (int w = 1; w <= 64; ++w) {
    for (int d = 1; d <= w; ++d) REQUIRE(feather_weight(d, w) > feather_weight(d - 1, w));
    REQUIRE(feather_weight(w, w) == 1.0);
    REQUIRE(feather_weight(w - 1, w) < 1.0);
  }
  CHECK(feather_weight(0, 0) == 1.0);
}

TEST_CASE("round_to_u8 rounds half away from zero and saturates") {
  CHECK(round_to_u8(0.5) == 1);
  CHECK(round_to_u8(1.49) == 1);
  CHECK(round_to_u8(254.5) == 255);
  CHECK(round_to_u8(-3.0) == 0);
  CHECK(round_to_u8(300.0) == 255);
}
