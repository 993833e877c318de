#pragma once

#include <array>
#include <compare>
#include <span>
#include <string>
#include <vector>

#include "mexpr/image.hpp"

namespace mexpr {

inline constexpr int kCanonicalSize = 512;
inline constexpr int kLandmarkCount = 106;
inline constexpr double kDefaultPadFrac = 0.30;
inline constexpr int kDefaultMinSide = 32;

struct Point2D {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2D&, const Point2D&) = default;
};

// The 106 landmark points of one face, in panel pixel coordinates.
class LandmarkSet {
 public:
  // Throws InvalidArgument unless there are exactly 106 finite points.
  explicit LandmarkSet(std::span<const Point2D> points);

  std::span<const Point2D> points() const noexcept { return points_; }
  friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;

 private:
  std::array<Point2D, kLandmarkCount> points_{};
};

// Axis-aligned box in continuous pixel coordinates; may extend past the panel.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;

  double center_x() const { return x + width / 2.0; }
  double center_y() const { return y + height / 2.0; }
  bool contains(const Point2D& p) const {
    return p.x >= x && p.x <= x + width && p.y >= y && p.y <= y + height;
  }
  friend bool operator==(const BBox&, const BBox&) = default;
};

// Integer square, always inside its panel once produced by clamp_square.
struct PixelSquare {
  int x = 0;
  int y = 0;
  int side = 0;

  BBox to_bbox() const { return {double(x), double(y), double(side), double(side)}; }
  bool intersects(const PixelSquare& o) const {
    return x < o.x + o.side && o.x < x + side && y < o.y + o.side && o.y < y + side;
  }
  friend bool operator==(const PixelSquare&, const PixelSquare&) = default;
};

// Exact ratio canonical_size / side.
struct Scale {
  int numerator = kCanonicalSize;
  int denominator = kCanonicalSize;

  double value() const { return static_cast<double>(numerator) / denominator; }
  friend bool operator==(const Scale&, const Scale&) = default;
};

enum class CropSource { kAuto, kManual };

std::string to_string(CropSource source);
CropSource crop_source_from_string(const std::string& text);

// Record linking a panel square to its 512x512 canonical face and back.
struct CropSpec {
  std::string panel_id;
  PixelSquare square;
  Scale scale;
  CropSource source = CropSource::kAuto;

  int side() const { return square.side; }
  friend bool operator==(const CropSpec&, const CropSpec&) = default;
};

// Min/max hull of the landmarks. Throws DegenerateLandmarks on zero extent.
BBox tight_bbox(const LandmarkSet& landmarks);

// Square of side round(max(w, h) * (1 + 2 * pad_frac)) sharing bbox's center.
BBox squarify_pad(const BBox& bbox, double pad_frac);

// Shrinks the side to fit the panel (keeping the origin), rounds to integer
// pixels, then translates by the minimal distance needed for containment.
// Throws PanelTooSmall if min(panel_width, panel_height) < min_side.
PixelSquare clamp_square(const BBox& square, int panel_width, int panel_height,
                         int min_side = kDefaultMinSide);

// Throws SideTooSmall if square.side < min_side.
CropSpec make_crop_spec(std::string panel_id, const PixelSquare& square, CropSource source,
                        int min_side = kDefaultMinSide);

bool inside_panel(const PixelSquare& square, int panel_width, int panel_height);

// Resamples the spec's square to 512x512x3; side 512 is an exact copy.
// Throws SpecOutOfBounds if the square does not fit the panel.
RasterImage extract_crop(const RasterImage& panel, const CropSpec& spec);

}  // namespace mexpr
