#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mexpr/composition.hpp"
#include "mexpr/face_preparation.hpp"
#include "mexpr/geometry.hpp"
#include "mexpr/reenactment.hpp"
#include "mexpr/session.hpp"

namespace mexpr {

using Json = nlohmann::json;

void to_json(Json& j, const Point2D& p);
void to_json(Json& j, const BBox& b);
void to_json(Json& j, const PixelSquare& s);
void from_json(const Json& j, PixelSquare& s);
void to_json(Json& j, const CropSpec& spec);
void from_json(const Json& j, CropSpec& spec);
void to_json(Json& j, const PreparedRegion& region);
void from_json(const Json& j, PreparedRegion& region);
void to_json(Json& j, const PreparationFailure& failure);
void to_json(Json& j, const PreparationSettings& settings);
void from_json(const Json& j, PreparationSettings& settings);
void to_json(Json& j, const RetargetParams& params);
void from_json(const Json& j, RetargetParams& params);
void to_json(Json& j, const EngineDescriptor& engine);
void to_json(Json& j, const Provenance& provenance);
void from_json(const Json& j, Provenance& provenance);
void to_json(Json& j, const BandStats& stats);
void from_json(const Json& j, BandStats& stats);
void to_json(Json& j, const FaceSeam& seam);
void from_json(const Json& j, FaceSeam& seam);
void to_json(Json& j, const SeamReport& report);
void from_json(const Json& j, SeamReport& report);
void to_json(Json& j, const OverlapWarning& warning);
void to_json(Json& j, const SessionStatus& status);

// Landmark fixture: an array of 106 [x, y] pairs.
std::vector<Point2D> parse_landmarks(const std::string& text);
LandmarkSet load_landmark_fixture(const std::filesystem::path& path);

// Parses "x,y,w,h".
BBox parse_rect(const std::string& text);

}  // namespace mexpr
