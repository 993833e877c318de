#include "mexpr/composition.hpp"

#include <algorithm>

#include "mexpr/error.hpp"
#include "mexpr/kernels.hpp"

namespace mexpr {

std::string to_string(SeamEdge edge) {
  switch (edge) {
    case SeamEdge::kTop: return "top";
    case SeamEdge::kBottom: return "bottom";
    case SeamEdge::kLeft: return "left";
    case SeamEdge::kRight: return "right";
  }
  return "unknown";
}

namespace {

struct Rect {
  int x0, y0, x1, y1;  // half-open
};

Rect clip(Rect r, int width, int height) {
  return {std::max(r.x0, 0), std::max(r.y0, 0), std::min(r.x1, width), std::min(r.y1, height)};
}

struct Accumulator {
  std::vector<std::uint64_t> sums;
  long pixels = 0;

  void add(const RasterImage& a, const RasterImage& b, Rect r) {
    r = clip(r, a.width(), a.height());
    if (r.x1 <= r.x0 || r.y1 <= r.y0) return;
    const auto s = kernels::abs_diff_sum(view(a, r.x0, r.y0, r.x1 - r.x0, r.y1 - r.y0),
                                         view(b, r.x0, r.y0, r.x1 - r.x0, r.y1 - r.y0));
    if (sums.empty()) sums.assign(s.size(), 0);
    for (std::size_t c = 0; c < s.size(); ++c) sums[c] += s[c];
    pixels += static_cast<long>(r.x1 - r.x0) * (r.y1 - r.y0);
  }

  void merge(const Accumulator& o) {
    if (sums.empty()) sums.assign(o.sums.size(), 0);
    for (std::size_t c = 0; c < o.sums.size(); ++c) sums[c] += o.sums[c];
    pixels += o.pixels;
  }

  BandStats stats(int channels) const {
    BandStats out{std::vector<double>(static_cast<std::size_t>(channels), 0.0), pixels};
    if (pixels == 0) return out;
    for (std::size_t c = 0; c < sums.size(); ++c) out.mad[c] = static_cast<double>(sums[c]) / pixels;
    return out;
  }
};

void check_face(const MappedFace& face, const std::string& panel_id, const RasterImage& panel) {
  if (face.crop_spec.panel_id != panel_id) {
    fail(ErrorCode::kMismatchedPanel,
         "face belongs to panel '" + face.crop_spec.panel_id + "', not '" + panel_id + "'");
  }
  if (!inside_panel(face.crop_spec.square, panel.width(), panel.height())) {
    fail(ErrorCode::kSpecOutOfBounds, "face square lies outside the panel");
  }
  if (face.image.width() != kCanonicalSize || face.image.height() != kCanonicalSize ||
      face.image.channels() != 3) {
    fail(ErrorCode::kInvalidArgument, "mapped face must be a 512x512 RGB image");
  }
}

}  // namespace

ComposedPanel compose(const RasterImage& panel, const std::string& panel_id,
                      std::span<const MappedFace> faces, int feather_width, int seam_margin) {
  if (feather_width < 0) fail(ErrorCode::kInvalidArgument, "feather width must be >= 0");
  if (seam_margin < 0) fail(ErrorCode::kInvalidArgument, "seam margin must be >= 0");
  for (const MappedFace& face : faces) check_face(face, panel_id, panel);

  ComposedPanel result;
  result.image = panel;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const MappedFace& face = faces[i];
    const PixelSquare& s = face.crop_spec.square;
    for (std::size_t j = 0; j < i; ++j) {
      if (faces[j].crop_spec.square.intersects(s)) {
        result.overlaps.push_back({static_cast<int>(j), static_cast<int>(i)});
      }
    }
    const MutableImageView target = mutable_view(result.image, s.x, s.y, s.side, s.side);
    if (s.side == kCanonicalSize) {
      kernels::paste(view(face.image), target, feather_width);
    } else {
      RasterImage resized(s.side, s.side, 3);
      kernels::resize_bilinear(view(face.image), mutable_view(resized));
      kernels::paste(view(resized), target, feather_width);
    }
    result.pasted.push_back(face.provenance);
  }
  result.seams = seam_metrics(panel, result.image, faces, seam_margin);
  return result;
}

SeamReport seam_metrics(const RasterImage& panel, const RasterImage& composed,
                        std::span<const MappedFace> faces, int margin) {
  if (!panel.same_shape(composed)) fail(ErrorCode::kInvalidArgument, "composed panel shape differs");
  if (margin < 0) fail(ErrorCode::kInvalidArgument, "seam margin must be >= 0");
  SeamReport report;
  report.margin = margin;
  const int ch = panel.channels();
  for (const MappedFace& face : faces) {
    const PixelSquare& s = face.crop_spec.square;
    const int x0 = s.x, y0 = s.y, x1 = s.x + s.side, y1 = s.y + s.side;
    const int m = margin;

    std::array<Accumulator, 4> inner, outer;
    inner[0].add(panel, composed, {x0, y0, x1, y0 + 1});
    inner[1].add(panel, composed, {x0, y1 - 1, x1, y1});
    inner[2].add(panel, composed, {x0, y0, x0 + 1, y1});
    inner[3].add(panel, composed, {x1 - 1, y0, x1, y1});
    outer[0].add(panel, composed, {x0 - m, y0 - m, x1 + m, y0});
    outer[1].add(panel, composed, {x0 - m, y1, x1 + m, y1 + m});
    outer[2].add(panel, composed, {x0 - m, y0, x0, y1});
    outer[3].add(panel, composed, {x1, y0, x1 + m, y1});

    // Ring without double-counted corners: full top/bottom rows plus the
    // side columns between them.
    Accumulator ring, outer_ring;
    ring.merge(inner[0]);
    if (s.side > 1) ring.merge(inner[1]);
    if (s.side > 2) {
      ring.add(panel, composed, {x0, y0 + 1, x0 + 1, y1 - 1});
      ring.add(panel, composed, {x1 - 1, y0 + 1, x1, y1 - 1});
    }
    for (const auto& o : outer) outer_ring.merge(o);

    FaceSeam seam{face.crop_spec, ring.stats(ch), outer_ring.stats(ch), {}, {}};
    for (int e = 0; e < 4; ++e) {
      seam.inner_edges[e] = inner[e].stats(ch);
      seam.outer_edges[e] = outer[e].stats(ch);
    }
    report.faces.push_back(std::move(seam));
  }
  return report;
}

}  // namespace mexpr
