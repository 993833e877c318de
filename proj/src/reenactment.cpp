#include "mexpr/reenactment.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "mexpr/codec.hpp"
#include "mexpr/error.hpp"
#include "mexpr/geometry.hpp"
#include "mexpr/subprocess.hpp"

namespace mexpr {

using nlohmann::json;

std::string to_string(MotionMode mode) { return mode == MotionMode::kRelative ? "relative" : "absolute"; }

MotionMode motion_mode_from_string(const std::string& text) {
  if (text == "relative") return MotionMode::kRelative;
  if (text == "absolute") return MotionMode::kAbsolute;
  fail(ErrorCode::kInvalidArgument, "unknown motion mode '" + text + "'");
}

void validate(const RetargetParams& params) {
  auto check = [](const std::optional<double>& v, const char* name) {
    if (v && !(*v >= 0.0 && *v <= 1.0)) {
      fail(ErrorCode::kParamOutOfRange, std::string(name) + " must lie in [0, 1], got " + std::to_string(*v));
    }
  };
  check(params.eye_openness, "eye_openness");
  check(params.lip_openness, "lip_openness");
}

namespace {

bool is_canonical(const RasterImage& image) {
  return image.width() == kCanonicalSize && image.height() == kCanonicalSize && image.channels() == 3;
}

int quantize(const std::optional<double>& v) {
  return v ? static_cast<int>(std::round(*v * 255.0)) : StampEngine::kDefaultLevel;
}

}  // namespace

ReenactmentEngine::ReenactmentEngine(EngineDescriptor descriptor)
    : descriptor_(std::move(descriptor)), gate_(std::max(1, descriptor_.max_concurrency)) {}

ReenactedFrame reenact(ReenactmentEngine& engine, const RasterImage& source, const RasterImage& driving,
                       int frame_index, MotionMode mode, const RetargetParams& params) {
  if (!is_canonical(source)) fail(ErrorCode::kInvalidSource, "source must be a 512x512 RGB crop");
  if (driving.empty()) fail(ErrorCode::kInvalidArgument, "driving frame is empty");
  if (frame_index < 0) fail(ErrorCode::kInvalidIndex, "negative frame index");
  validate(params);

  engine.gate_.acquire();
  struct Release {
    std::counting_semaphore<1024>& g;
    ~Release() { g.release(); }
  } release{engine.gate_};
  RasterImage out = engine.run(source, driving, frame_index, mode, params);
  if (!is_canonical(out)) {
    fail(ErrorCode::kEngineFailure, engine.descriptor().name + " returned a non-canonical image");
  }
  return {std::move(out), frame_index, params, mode};
}

IdentityEngine::IdentityEngine() : ReenactmentEngine({"identity", true, 64}) {}

RasterImage IdentityEngine::run(const RasterImage& source, const RasterImage&, int, MotionMode,
                                const RetargetParams&) {
  return source;
}

StampEngine::StampEngine() : ReenactmentEngine({"stamp", true, 64}) {}

StampCode stamp_code(int frame_index, const RetargetParams& params) {
  return {frame_index % 256, quantize(params.eye_openness), quantize(params.lip_openness)};
}

RasterImage StampEngine::run(const RasterImage& source, const RasterImage&, int frame_index, MotionMode,
                             const RetargetParams& params) {
  RasterImage out = source;
  const StampCode code = stamp_code(frame_index, params);
  for (int y = 0; y < kBlock; ++y) {
    for (int x = 0; x < kBlock; ++x) {
      out.at(x, y, 0) = static_cast<std::uint8_t>(code.frame);
      out.at(x, y, 1) = static_cast<std::uint8_t>(code.eye);
      out.at(x, y, 2) = static_cast<std::uint8_t>(code.lip);
    }
  }
  return out;
}

std::optional<StampCode> decode_stamp(const RasterImage& image, int x, int y, int block) {
  if (image.channels() != 3 || x < 0 || y < 0 || x + block > image.width() ||
      y + block > image.height() || block < 1) {
    return std::nullopt;
  }
  const StampCode code{image.at(x, y, 0), image.at(x, y, 1), image.at(x, y, 2)};
  for (int yy = y; yy < y + block; ++yy) {
    for (int xx = x; xx < x + block; ++xx) {
      if (image.at(xx, yy, 0) != code.frame || image.at(xx, yy, 1) != code.eye ||
          image.at(xx, yy, 2) != code.lip) {
        return std::nullopt;
      }
    }
  }
  return code;
}

ExternalEngine::ExternalEngine(std::string label, std::vector<std::string> argv,
                               std::chrono::milliseconds timeout, int max_concurrency)
    : ReenactmentEngine({"external:" + label, false, max_concurrency}),
      argv_(std::move(argv)),
      timeout_(timeout) {}

bool ExternalEngine::available() const { return !argv_.empty() && executable_available(argv_.front()); }

std::string external_request(const RasterImage& source, const RasterImage& driving, MotionMode mode,
                             const RetargetParams& params) {
  json request{{"source", base64_encode(encode_png(source))},
               {"driving", base64_encode(encode_png(driving))},
               {"mode", to_string(mode)},
               {"eye", params.eye_openness ? json(*params.eye_openness) : json(nullptr)},
               {"lip", params.lip_openness ? json(*params.lip_openness) : json(nullptr)}};
  return request.dump();
}

RasterImage ExternalEngine::run(const RasterImage& source, const RasterImage& driving, int, MotionMode mode,
                                const RetargetParams& params) {
  const std::string request = external_request(source, driving, mode, params);
  const std::span<const std::uint8_t> input(reinterpret_cast<const std::uint8_t*>(request.data()),
                                            request.size());
  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const ProcessResult r = run_process(argv_, input, timeout_);
    if (!r.spawned) {
      last_error = "engine could not be started";
      continue;
    }
    if (r.timed_out) {
      last_error = "engine timed out";
      continue;
    }
    if (r.exit_code != 0) {
      last_error = "engine exited with status " + std::to_string(r.exit_code) + ": " + r.err;
      continue;
    }
    try {
      const json response = json::parse(r.out.begin(), r.out.end());
      if (response.contains("error")) {
        last_error = "engine reported: " + response["error"].get<std::string>();
        continue;
      }
      return decode_png(base64_decode(response.at("image").get<std::string>()));
    } catch (const std::exception& e) {
      last_error = std::string("malformed engine response: ") + e.what();
    }
  }
  fail(ErrorCode::kEngineFailure, descriptor().name + ": " + last_error);
}

EngineRegistry::EngineRegistry() {
  add(std::make_shared<IdentityEngine>());
  add(std::make_shared<StampEngine>());
}

void EngineRegistry::add(std::shared_ptr<ReenactmentEngine> engine) {
  const std::string name = engine->descriptor().name;
  if (!engines_.contains(name)) order_.push_back(name);
  engines_[name] = std::move(engine);
}

void EngineRegistry::add_external(const std::string& config) {
  const auto eq = config.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(ErrorCode::kInvalidArgument, "external engine must be configured as label=command");
  }
  auto argv = split_command(config.substr(eq + 1));
  if (argv.empty()) fail(ErrorCode::kInvalidArgument, "external engine command is empty");
  add(std::make_shared<ExternalEngine>(config.substr(0, eq), std::move(argv)));
}

std::shared_ptr<ReenactmentEngine> EngineRegistry::find(const std::string& name) const {
  const auto it = engines_.find(name);
  if (it == engines_.end()) fail(ErrorCode::kEngineUnknown, "unknown engine '" + name + "'");
  if (!it->second->available()) fail(ErrorCode::kEngineUnknown, "engine '" + name + "' is unreachable");
  return it->second;
}

EngineListing EngineRegistry::list_engines() const {
  EngineListing listing;
  for (const std::string& name : order_) {
    const auto& engine = engines_.at(name);
    if (engine->available()) {
      listing.engines.push_back(engine->descriptor());
    } else {
      listing.diagnostics.push_back("engine '" + name + "' is configured but unreachable");
    }
  }
  return listing;
}

}  // namespace mexpr
