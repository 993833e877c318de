#include "mexpr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mexpr/error.hpp"
#include "mexpr/kernels.hpp"

namespace mexpr {

LandmarkSet::LandmarkSet(std::span<const Point2D> points) {
  if (points.size() != kLandmarkCount) {
    fail(ErrorCode::kInvalidArgument,
         "expected 106 landmarks, got " + std::to_string(points.size()));
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y)) {
      fail(ErrorCode::kInvalidArgument, "landmark " + std::to_string(i) + " is not finite");
    }
    points_[i] = points[i];
  }
}

std::string to_string(CropSource source) { return source == CropSource::kAuto ? "auto" : "manual"; }

CropSource crop_source_from_string(const std::string& text) {
  if (text == "auto") return CropSource::kAuto;
  if (text == "manual") return CropSource::kManual;
  fail(ErrorCode::kInvalidArgument, "unknown crop source '" + text + "'");
}

BBox tight_bbox(const LandmarkSet& landmarks) {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  for (const Point2D& p : landmarks.points()) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  const BBox box{min_x, min_y, max_x - min_x, max_y - min_y};
  if (box.width <= 0.0 || box.height <= 0.0) {
    fail(ErrorCode::kDegenerateLandmarks, "landmark hull has zero width or height");
  }
  return box;
}

BBox squarify_pad(const BBox& bbox, double pad_frac) {
  if (!(bbox.width > 0.0 && bbox.height > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "squarify_pad needs a non-degenerate box");
  }
  if (!(pad_frac >= 0.0 && pad_frac <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "pad_frac must lie in [0, 1]");
  }
  const double side = std::round(std::max(bbox.width, bbox.height) * (1.0 + 2.0 * pad_frac));
  return {bbox.center_x() - side / 2.0, bbox.center_y() - side / 2.0, side, side};
}

PixelSquare clamp_square(const BBox& square, int panel_width, int panel_height, int min_side) {
  if (square.width != square.height) {
    fail(ErrorCode::kInvalidArgument, "clamp_square needs a square box");
  }
  if (std::min(panel_width, panel_height) < min_side) {
    fail(ErrorCode::kPanelTooSmall, "panel " + std::to_string(panel_width) + "x" +
                                        std::to_string(panel_height) + " cannot hold a " +
                                        std::to_string(min_side) + " px region");
  }
  const int side = std::min({static_cast<int>(std::round(square.width)), panel_width, panel_height});
  const int x = static_cast<int>(std::round(square.x));
  const int y = static_cast<int>(std::round(square.y));
  return {std::clamp(x, 0, panel_width - side), std::clamp(y, 0, panel_height - side), side};
}

CropSpec make_crop_spec(std::string panel_id, const PixelSquare& square, CropSource source,
                        int min_side) {
  if (square.side < min_side) {
    fail(ErrorCode::kSideTooSmall, "region side " + std::to_string(square.side) +
                                       " is below the minimum of " + std::to_string(min_side));
  }
  return {std::move(panel_id), square, Scale{kCanonicalSize, square.side}, source};
}

bool inside_panel(const PixelSquare& s, int panel_width, int panel_height) {
  return s.side >= 1 && s.x >= 0 && s.y >= 0 && s.x + s.side <= panel_width &&
         s.y + s.side <= panel_height;
}

RasterImage extract_crop(const RasterImage& panel, const CropSpec& spec) {
  const PixelSquare& s = spec.square;
  if (!inside_panel(s, panel.width(), panel.height())) {
    fail(ErrorCode::kSpecOutOfBounds, "crop square lies outside the panel; the spec is stale");
  }
  if (s.side == kCanonicalSize) {
    return to_rgb(copy_region(panel, s.x, s.y, s.side, s.side));
  }
  RasterImage resized(kCanonicalSize, kCanonicalSize, panel.channels());
  kernels::resize_bilinear(view(panel, s.x, s.y, s.side, s.side), mutable_view(resized));
  return to_rgb(resized);
}

}  // namespace mexpr
