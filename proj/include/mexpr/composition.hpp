#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "mexpr/geometry.hpp"
#include "mexpr/image.hpp"
#include "mexpr/session.hpp"

namespace mexpr {

inline constexpr int kDefaultSeamMargin = 4;

enum class SeamEdge { kTop = 0, kBottom = 1, kLeft = 2, kRight = 3 };

std::string to_string(SeamEdge edge);

// Mean absolute difference per channel between source and composed panel.
struct BandStats {
  std::vector<double> mad;
  long pixels = 0;

  friend bool operator==(const BandStats&, const BandStats&) = default;
};

// Seam bands of one pasted square: the 1-px inner ring and a `margin`-wide
// outer ring, both clipped to the panel, overall and per edge.
struct FaceSeam {
  CropSpec crop_spec;
  BandStats inner;
  BandStats outer;
  std::array<BandStats, 4> inner_edges;  // indexed by SeamEdge
  std::array<BandStats, 4> outer_edges;

  friend bool operator==(const FaceSeam&, const FaceSeam&) = default;
};

struct SeamReport {
  int margin = kDefaultSeamMargin;
  std::vector<FaceSeam> faces;

  friend bool operator==(const SeamReport&, const SeamReport&) = default;
};

struct OverlapWarning {
  int earlier = 0;  // positions in the face list
  int later = 0;
  friend bool operator==(const OverlapWarning&, const OverlapWarning&) = default;
};

struct ComposedPanel {
  RasterImage image;
  std::vector<Provenance> pasted;
  std::vector<OverlapWarning> overlaps;
  SeamReport seams;
};

// Resizes each face back to its square and pastes it at the recorded origin,
// in list order. feather_width 0 is a hard paste.
// Throws MismatchedPanel, SpecOutOfBounds, InvalidArgument.
ComposedPanel compose(const RasterImage& panel, const std::string& panel_id,
                      std::span<const MappedFace> faces, int feather_width = 0,
                      int seam_margin = kDefaultSeamMargin);

SeamReport seam_metrics(const RasterImage& panel, const RasterImage& composed,
                        std::span<const MappedFace> faces, int margin = kDefaultSeamMargin);

}  // namespace mexpr
