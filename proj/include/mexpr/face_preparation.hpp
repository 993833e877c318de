#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <vector>

#include "mexpr/error.hpp"
#include "mexpr/geometry.hpp"
#include "mexpr/image.hpp"

namespace mexpr {

struct DetectedFace {
  LandmarkSet landmarks;
  double confidence = 1.0;
  std::optional<double> yaw_degrees;
  std::optional<BBox> bbox_hint;  // informational, never used for cropping
};

// Adapter output before landmark-count validation.
struct RawFace {
  std::vector<Point2D> landmarks;
  double confidence = 1.0;
  std::optional<double> yaw_degrees;
  std::optional<BBox> bbox_hint;
};

// Parses the detector response document:
//   [{"landmarks": [[x, y], ...], "confidence": c, "yaw": optional}, ...]
// Throws AdapterProtocolError on malformed content. Landmark counts are not
// checked here.
std::vector<RawFace> parse_detector_response(const std::string& text);

class DetectorAdapter {
 public:
  DetectorAdapter(std::string name, int max_concurrency);
  virtual ~DetectorAdapter() = default;
  DetectorAdapter(const DetectorAdapter&) = delete;
  DetectorAdapter& operator=(const DetectorAdapter&) = delete;

  const std::string& name() const noexcept { return name_; }
  int max_concurrency() const noexcept { return max_concurrency_; }

  // Blocks while max_concurrency calls are already in flight.
  std::vector<RawFace> run(const RasterImage& panel);

 protected:
  virtual std::vector<RawFace> detect(const RasterImage& panel) = 0;

 private:
  std::string name_;
  int max_concurrency_;
  std::counting_semaphore<1024> gate_;
};

// Replays a detector response document from disk (or from memory).
class MockDetector final : public DetectorAdapter {
 public:
  explicit MockDetector(std::filesystem::path fixture);
  explicit MockDetector(std::vector<RawFace> faces);

 protected:
  std::vector<RawFace> detect(const RasterImage& panel) override;

 private:
  std::optional<std::filesystem::path> fixture_;
  std::vector<RawFace> faces_;
};

// Out-of-process detector: PNG bytes on stdin, response document on stdout.
class SubprocessDetector final : public DetectorAdapter {
 public:
  explicit SubprocessDetector(std::vector<std::string> argv,
                              std::chrono::milliseconds timeout = std::chrono::seconds(60));

 protected:
  std::vector<RawFace> detect(const RasterImage& panel) override;

 private:
  std::vector<std::string> argv_;
  std::chrono::milliseconds timeout_;
};

// "mock:<fixture path>" or "external:<command line>".
std::shared_ptr<DetectorAdapter> make_detector(const std::string& spec);

struct DetectionResult {
  std::vector<DetectedFace> faces;
  std::vector<std::string> diagnostics;
};

// Faces without exactly 106 finite landmarks are dropped with a diagnostic.
DetectionResult detect_faces(const RasterImage& panel, DetectorAdapter& adapter);

enum class FaceWarning { kSmallFace, kExtremePose, kLowConfidence };

std::string to_string(FaceWarning warning);
FaceWarning face_warning_from_string(const std::string& text);

struct PreparationSettings {
  double pad_frac = kDefaultPadFrac;
  int min_side = kDefaultMinSide;
  int small_face_side = 64;           // pre-clamp side below this warns
  double extreme_yaw_degrees = 45.0;  // |yaw| above this warns
  double low_confidence = 0.5;        // confidence below this warns

  friend bool operator==(const PreparationSettings&, const PreparationSettings&) = default;
};

struct PreparedRegion {
  CropSpec crop_spec;
  CropSource origin = CropSource::kAuto;
  std::vector<FaceWarning> warnings;
  int face_index = 0;

  friend bool operator==(const PreparedRegion&, const PreparedRegion&) = default;
};

// A detected face that could not become a region (drawn as a red box).
struct PreparationFailure {
  int detection_index = 0;  // position in the detector's face list
  BBox square;              // padded square before clamping
  ErrorCode reason = ErrorCode::kSideTooSmall;
  std::string message;
};

struct PreparationResult {
  std::vector<PreparedRegion> regions;
  std::vector<PreparationFailure> failures;
};

// Regions are ordered by descending side, then ascending x, then ascending y;
// face_index follows that order starting at first_index.
PreparationResult prepare_regions(std::span<const DetectedFace> faces, const std::string& panel_id,
                                  int panel_width, int panel_height,
                                  const PreparationSettings& settings = {}, int first_index = 0);

// The drawn rectangle is squarified (side = max(w, h), same center) and
// clamped. Throws SideTooSmall.
PreparedRegion manual_frame(const std::string& panel_id, int panel_width, int panel_height,
                            const BBox& rect, const PreparationSettings& settings = {},
                            int face_index = 0);

}  // namespace mexpr
