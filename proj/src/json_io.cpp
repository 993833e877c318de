#include "mexpr/json_io.hpp"

#include <sstream>

#include "mexpr/codec.hpp"
#include "mexpr/error.hpp"

namespace mexpr {

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> read_optional(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

void to_json(Json& j, const Point2D& p) { j = Json::array({p.x, p.y}); }

void to_json(Json& j, const BBox& b) { j = Json::array({b.x, b.y, b.width, b.height}); }

void to_json(Json& j, const PixelSquare& s) { j = Json{{"x", s.x}, {"y", s.y}, {"side", s.side}}; }

void from_json(const Json& j, PixelSquare& s) {
  s.x = j.at("x").get<int>();
  s.y = j.at("y").get<int>();
  s.side = j.at("side").get<int>();
}

void to_json(Json& j, const CropSpec& spec) {
  j = Json{{"panel_id", spec.panel_id},
           {"square", spec.square},
           {"side", spec.side()},
           {"canonical_size", kCanonicalSize},
           {"scale", spec.scale.value()},
           {"scale_ratio", Json::array({spec.scale.numerator, spec.scale.denominator})},
           {"source", to_string(spec.source)}};
}

void from_json(const Json& j, CropSpec& spec) {
  spec.panel_id = j.at("panel_id").get<std::string>();
  spec.square = j.at("square").get<PixelSquare>();
  spec.source = crop_source_from_string(j.at("source").get<std::string>());
  if (spec.square.side < 1) fail(ErrorCode::kInvalidArgument, "crop spec side must be positive");
  spec.scale = Scale{kCanonicalSize, spec.square.side};
}

void to_json(Json& j, const PreparedRegion& region) {
  Json warnings = Json::array();
  for (FaceWarning w : region.warnings) warnings.push_back(to_string(w));
  j = Json{{"crop_spec", region.crop_spec},
           {"origin", to_string(region.origin)},
           {"warnings", warnings},
           {"face_index", region.face_index}};
}

void from_json(const Json& j, PreparedRegion& region) {
  region.crop_spec = j.at("crop_spec").get<CropSpec>();
  region.origin = crop_source_from_string(j.at("origin").get<std::string>());
  region.warnings.clear();
  for (const Json& w : j.at("warnings")) region.warnings.push_back(face_warning_from_string(w.get<std::string>()));
  region.face_index = j.at("face_index").get<int>();
}

void to_json(Json& j, const PreparationFailure& failure) {
  j = Json{{"detection_index", failure.detection_index},
           {"square", failure.square},
           {"reason", std::string(to_token(failure.reason))},
           {"message", failure.message}};
}

void to_json(Json& j, const PreparationSettings& s) {
  j = Json{{"pad_frac", s.pad_frac},
           {"min_side", s.min_side},
           {"small_face_side", s.small_face_side},
           {"extreme_yaw_degrees", s.extreme_yaw_degrees},
           {"low_confidence", s.low_confidence}};
}

void from_json(const Json& j, PreparationSettings& s) {
  s.pad_frac = j.at("pad_frac").get<double>();
  s.min_side = j.at("min_side").get<int>();
  s.small_face_side = j.at("small_face_side").get<int>();
  s.extreme_yaw_degrees = j.at("extreme_yaw_degrees").get<double>();
  s.low_confidence = j.at("low_confidence").get<double>();
}

void to_json(Json& j, const RetargetParams& params) {
  j = Json{{"eye", optional_number(params.eye_openness)}, {"lip", optional_number(params.lip_openness)}};
}

void from_json(const Json& j, RetargetParams& params) {
  params.eye_openness = read_optional(j, "eye");
  params.lip_openness = read_optional(j, "lip");
}

void to_json(Json& j, const EngineDescriptor& engine) {
  j = Json{{"name", engine.name},
           {"deterministic", engine.deterministic},
           {"max_concurrency", engine.max_concurrency}};
}

void to_json(Json& j, const Provenance& p) {
  j = Json{{"engine", p.engine}, {"frame_index", p.frame_index}, {"mode", to_string(p.mode)}, {"params", p.params}};
}

void from_json(const Json& j, Provenance& p) {
  p.engine = j.at("engine").get<std::string>();
  p.frame_index = j.at("frame_index").get<int>();
  p.mode = motion_mode_from_string(j.at("mode").get<std::string>());
  p.params = j.at("params").get<RetargetParams>();
}

void to_json(Json& j, const BandStats& stats) { j = Json{{"mad", stats.mad}, {"pixels", stats.pixels}}; }

void from_json(const Json& j, BandStats& stats) {
  stats.mad = j.at("mad").get<std::vector<double>>();
  stats.pixels = j.at("pixels").get<long>();
}

void to_json(Json& j, const FaceSeam& seam) {
  Json inner_edges, outer_edges;
  for (int e = 0; e < 4; ++e) {
    inner_edges[to_string(static_cast<SeamEdge>(e))] = seam.inner_edges[e];
    outer_edges[to_string(static_cast<SeamEdge>(e))] = seam.outer_edges[e];
  }
  j = Json{{"crop_spec", seam.crop_spec},
           {"inner", seam.inner},
           {"outer", seam.outer},
           {"inner_edges", inner_edges},
           {"outer_edges", outer_edges}};
}

void from_json(const Json& j, FaceSeam& seam) {
  seam.crop_spec = j.at("crop_spec").get<CropSpec>();
  seam.inner = j.at("inner").get<BandStats>();
  seam.outer = j.at("outer").get<BandStats>();
  for (int e = 0; e < 4; ++e) {
    const std::string name = to_string(static_cast<SeamEdge>(e));
    seam.inner_edges[e] = j.at("inner_edges").at(name).get<BandStats>();
    seam.outer_edges[e] = j.at("outer_edges").at(name).get<BandStats>();
  }
}

void to_json(Json& j, const SeamReport& report) { j = Json{{"margin", report.margin}, {"faces", report.faces}}; }

void from_json(const Json& j, SeamReport& report) {
  report.margin = j.at("margin").get<int>();
  report.faces = j.at("faces").get<std::vector<FaceSeam>>();
}

void to_json(Json& j, const OverlapWarning& w) { j = Json{{"earlier", w.earlier}, {"later", w.later}}; }

void to_json(Json& j, const SessionStatus& s) {
  Json failures = Json::object();
  for (const auto& [i, msg] : s.failures) failures[std::to_string(i)] = msg;
  j = Json{{"state", to_string(s.state)},
           {"frame_count", s.frame_count},
           {"available_indices", s.available},
           {"pending_indices", s.pending},
           {"failures", failures},
           {"selected_index", s.selected ? Json(*s.selected) : Json(nullptr)},
           {"params", s.params},
           {"mode", to_string(s.mode)}};
}

std::vector<Point2D> parse_landmarks(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kInvalidArgument, std::string("landmark fixture: ") + e.what());
  }
  if (!doc.is_array()) fail(ErrorCode::kInvalidArgument, "landmark fixture must be an array");
  std::vector<Point2D> points;
  for (const Json& p : doc) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      fail(ErrorCode::kInvalidArgument, "landmark fixture entries must be [x, y] pairs");
    }
    points.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return points;
}

LandmarkSet load_landmark_fixture(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return LandmarkSet(parse_landmarks(std::string(bytes.begin(), bytes.end())));
}

BBox parse_rect(const std::string& text) {
  std::istringstream in(text);
  double v[4];
  char comma = 0;
  for (int i = 0; i < 4; ++i) {
    if (!(in >> v[i])) fail(ErrorCode::kInvalidArgument, "rect must be x,y,w,h");
    if (i < 3 && (!(in >> comma) || comma != ',')) fail(ErrorCode::kInvalidArgument, "rect must be x,y,w,h");
  }
  if (in >> comma) fail(ErrorCode::kInvalidArgument, "rect must be x,y,w,h");
  return {v[0], v[1], v[2], v[3]};
}

}  // namespace mexpr
