#include "mexpr/face_preparation.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "mexpr/codec.hpp"
#include "mexpr/subprocess.hpp"

namespace mexpr {

using nlohmann::json;

namespace {

[[noreturn]] void protocol_error(const std::string& what) {
  fail(ErrorCode::kAdapterProtocolError, "detector response: " + what);
}

double number_field(const json& j, const char* what) {
  if (!j.is_number()) protocol_error(std::string(what) + " is not a number");
  return j.get<double>();
}

}  // namespace

std::vector<RawFace> parse_detector_response(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    protocol_error(e.what());
  }
  if (!doc.is_array()) protocol_error("top level must be an array of faces");
  std::vector<RawFace> faces;
  for (const json& jf : doc) {
    if (!jf.is_object() || !jf.contains("landmarks") || !jf["landmarks"].is_array()) {
      protocol_error("each face needs a landmarks array");
    }
    RawFace face;
    for (const json& p : jf["landmarks"]) {
      if (!p.is_array() || p.size() != 2) protocol_error("landmark must be an [x, y] pair");
      face.landmarks.push_back({number_field(p[0], "x"), number_field(p[1], "y")});
    }
    if (jf.contains("confidence")) face.confidence = number_field(jf["confidence"], "confidence");
    if (!(face.confidence >= 0.0 && face.confidence <= 1.0)) protocol_error("confidence outside [0, 1]");
    if (jf.contains("yaw") && !jf["yaw"].is_null()) {
      const double yaw = number_field(jf["yaw"], "yaw");
      if (!(yaw >= -180.0 && yaw <= 180.0)) protocol_error("yaw outside [-180, 180]");
      face.yaw_degrees = yaw;
    }
    if (jf.contains("bbox") && jf["bbox"].is_array() && jf["bbox"].size() == 4) {
      const json& b = jf["bbox"];
      face.bbox_hint = BBox{number_field(b[0], "bbox"), number_field(b[1], "bbox"),
                            number_field(b[2], "bbox"), number_field(b[3], "bbox")};
    }
    faces.push_back(std::move(face));
  }
  return faces;
}

DetectorAdapter::DetectorAdapter(std::string name, int max_concurrency)
    : name_(std::move(name)), max_concurrency_(max_concurrency), gate_(std::max(1, max_concurrency)) {
  if (max_concurrency < 1) fail(ErrorCode::kInvalidArgument, "max_concurrency must be positive");
}

std::vector<RawFace> DetectorAdapter::run(const RasterImage& panel) {
  gate_.acquire();
  struct Release {
    std::counting_semaphore<1024>& g;
    ~Release() { g.release(); }
  } release{gate_};
  return detect(panel);
}

MockDetector::MockDetector(std::filesystem::path fixture)
    : DetectorAdapter("mock", 64), fixture_(std::move(fixture)) {}

MockDetector::MockDetector(std::vector<RawFace> faces)
    : DetectorAdapter("mock", 64), faces_(std::move(faces)) {}

std::vector<RawFace> MockDetector::detect(const RasterImage&) {
  if (!fixture_) return faces_;
  Bytes bytes;
  try {
    bytes = read_file(*fixture_);
  } catch (const Error&) {
    fail(ErrorCode::kAdapterUnavailable, "mock detector fixture missing: " + fixture_->string());
  }
  return parse_detector_response(std::string(bytes.begin(), bytes.end()));
}

SubprocessDetector::SubprocessDetector(std::vector<std::string> argv, std::chrono::milliseconds timeout)
    : DetectorAdapter(argv.empty() ? "external" : "external:" + argv.front(), 1),
      argv_(std::move(argv)),
      timeout_(timeout) {}

std::vector<RawFace> SubprocessDetector::detect(const RasterImage& panel) {
  const Bytes png = encode_png(panel);
  const ProcessResult r = run_process(argv_, png, timeout_);
  if (!r.spawned) fail(ErrorCode::kAdapterUnavailable, "detector could not be started");
  if (r.timed_out) fail(ErrorCode::kAdapterUnavailable, "detector timed out");
  if (r.exit_code != 0) {
    fail(ErrorCode::kAdapterUnavailable,
         "detector exited with status " + std::to_string(r.exit_code) + ": " + r.err);
  }
  return parse_detector_response(std::string(r.out.begin(), r.out.end()));
}

std::shared_ptr<DetectorAdapter> make_detector(const std::string& spec) {
  if (spec.rfind("mock:", 0) == 0) return std::make_shared<MockDetector>(spec.substr(5));
  if (spec.rfind("external:", 0) == 0) {
    auto argv = split_command(spec.substr(9));
    if (argv.empty() || !executable_available(argv.front())) {
      fail(ErrorCode::kAdapterUnavailable, "detector executable not found: " + spec.substr(9));
    }
    return std::make_shared<SubprocessDetector>(std::move(argv));
  }
  fail(ErrorCode::kAdapterUnavailable, "unknown detector '" + spec + "'");
}

DetectionResult detect_faces(const RasterImage& panel, DetectorAdapter& adapter) {
  if (panel.empty()) fail(ErrorCode::kInvalidArgument, "panel is empty");
  DetectionResult result;
  std::vector<RawFace> raw = adapter.run(panel);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    RawFace& f = raw[i];
    if (f.landmarks.size() != kLandmarkCount) {
      result.diagnostics.push_back("face " + std::to_string(i) + " dropped: " +
                                   std::to_string(f.landmarks.size()) + " landmarks instead of 106");
      continue;
    }
    try {
      result.faces.push_back({LandmarkSet(f.landmarks), f.confidence, f.yaw_degrees, f.bbox_hint});
    } catch (const Error& e) {
      result.diagnostics.push_back("face " + std::to_string(i) + " dropped: " + e.what());
    }
  }
  return result;
}

std::string to_string(FaceWarning warning) {
  switch (warning) {
    case FaceWarning::kSmallFace: return "small_face";
    case FaceWarning::kExtremePose: return "extreme_pose";
    case FaceWarning::kLowConfidence: return "low_confidence";
  }
  return "unknown";
}

FaceWarning face_warning_from_string(const std::string& text) {
  if (text == "small_face") return FaceWarning::kSmallFace;
  if (text == "extreme_pose") return FaceWarning::kExtremePose;
  if (text == "low_confidence") return FaceWarning::kLowConfidence;
  fail(ErrorCode::kInvalidArgument, "unknown warning '" + text + "'");
}

PreparationResult prepare_regions(std::span<const DetectedFace> faces, const std::string& panel_id,
                                  int panel_width, int panel_height,
                                  const PreparationSettings& settings, int first_index) {
  PreparationResult result;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const DetectedFace& face = faces[i];
    BBox padded;
    try {
      padded = squarify_pad(tight_bbox(face.landmarks), settings.pad_frac);
      const PixelSquare square = clamp_square(padded, panel_width, panel_height, settings.min_side);
      PreparedRegion region{make_crop_spec(panel_id, square, CropSource::kAuto, settings.min_side),
                            CropSource::kAuto, {}, 0};
      if (padded.width < settings.small_face_side) region.warnings.push_back(FaceWarning::kSmallFace);
      if (face.yaw_degrees && std::abs(*face.yaw_degrees) > settings.extreme_yaw_degrees) {
        region.warnings.push_back(FaceWarning::kExtremePose);
      }
      if (face.confidence < settings.low_confidence) {
        region.warnings.push_back(FaceWarning::kLowConfidence);
      }
      result.regions.push_back(std::move(region));
    } catch (const Error& e) {
      result.failures.push_back({static_cast<int>(i), padded, e.code(), e.what()});
    }
  }
  std::stable_sort(result.regions.begin(), result.regions.end(),
                   [](const PreparedRegion& a, const PreparedRegion& b) {
                     const PixelSquare& sa = a.crop_spec.square;
                     const PixelSquare& sb = b.crop_spec.square;
                     if (sa.side != sb.side) return sa.side > sb.side;
                     if (sa.x != sb.x) return sa.x < sb.x;
                     return sa.y < sb.y;
                   });
  for (std::size_t i = 0; i < result.regions.size(); ++i) {
    result.regions[i].face_index = first_index + static_cast<int>(i);
  }
  return result;
}

PreparedRegion manual_frame(const std::string& panel_id, int panel_width, int panel_height,
                            const BBox& rect, const PreparationSettings& settings, int face_index) {
  if (!(rect.width > 0.0 && rect.height > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "manual frame needs a positive extent");
  }
  const double side = std::max(rect.width, rect.height);
  const BBox square{rect.center_x() - side / 2.0, rect.center_y() - side / 2.0, side, side};
  if (side < settings.min_side) {
    fail(ErrorCode::kSideTooSmall, "manual frame side " + std::to_string(side) +
                                       " is below the minimum of " + std::to_string(settings.min_side));
  }
  PixelSquare clamped;
  try {
    clamped = clamp_square(square, panel_width, panel_height, settings.min_side);
  } catch (const Error& e) {
    fail(ErrorCode::kSideTooSmall, e.what());
  }
  PreparedRegion region{make_crop_spec(panel_id, clamped, CropSource::kManual, settings.min_side),
                        CropSource::kManual, {}, face_index};
  if (side < settings.small_face_side) region.warnings.push_back(FaceWarning::kSmallFace);
  return region;
}

}  // namespace mexpr
