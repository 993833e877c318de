#pragma once

#include <chrono>
#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "mexpr/image.hpp"

namespace mexpr {

enum class MotionMode { kRelative, kAbsolute };

std::string to_string(MotionMode mode);
MotionMode motion_mode_from_string(const std::string& text);

// Eye/lip retargeting sliders, normalized to [0, 1]. An empty value means
// "leave it to the engine".
struct RetargetParams {
  std::optional<double> eye_openness;
  std::optional<double> lip_openness;

  friend bool operator==(const RetargetParams&, const RetargetParams&) = default;
  friend auto operator<=>(const RetargetParams&, const RetargetParams&) = default;
};

// Throws ParamOutOfRange.
void validate(const RetargetParams& params);

struct EngineDescriptor {
  std::string name;  // identity | stamp | external:<label>
  bool deterministic = true;
  int max_concurrency = 1;

  friend bool operator==(const EngineDescriptor&, const EngineDescriptor&) = default;
};

struct ReenactedFrame {
  RasterImage image;  // 512x512x3
  int frame_index = 0;
  RetargetParams params_used;
  MotionMode mode_used = MotionMode::kRelative;
};

class ReenactmentEngine {
 public:
  explicit ReenactmentEngine(EngineDescriptor descriptor);
  virtual ~ReenactmentEngine() = default;
  ReenactmentEngine(const ReenactmentEngine&) = delete;
  ReenactmentEngine& operator=(const ReenactmentEngine&) = delete;

  const EngineDescriptor& descriptor() const noexcept { return descriptor_; }

  // Reachability probe; built-ins are always available.
  virtual bool available() const { return true; }

 protected:
  virtual RasterImage run(const RasterImage& source, const RasterImage& driving, int frame_index,
                          MotionMode mode, const RetargetParams& params) = 0;

 private:
  friend ReenactedFrame reenact(ReenactmentEngine&, const RasterImage&, const RasterImage&, int,
                                MotionMode, const RetargetParams&);
  EngineDescriptor descriptor_;
  std::counting_semaphore<1024> gate_;
};

// Validates the canonical source and engine output, holding one of the
// engine's concurrency slots for the duration of the call.
// Throws InvalidSource, ParamOutOfRange, EngineFailure.
ReenactedFrame reenact(ReenactmentEngine& engine, const RasterImage& source, const RasterImage& driving,
                       int frame_index, MotionMode mode, const RetargetParams& params);

class IdentityEngine final : public ReenactmentEngine {
 public:
  IdentityEngine();

 protected:
  RasterImage run(const RasterImage& source, const RasterImage&, int, MotionMode,
                  const RetargetParams&) override;
};

// Writes (frame_index mod 256, eye, lip) into the top-left 16x16 block.
class StampEngine final : public ReenactmentEngine {
 public:
  static constexpr int kBlock = 16;
  static constexpr std::uint8_t kDefaultLevel = 128;

  StampEngine();

 protected:
  RasterImage run(const RasterImage& source, const RasterImage&, int frame_index, MotionMode,
                  const RetargetParams& params) override;
};

struct StampCode {
  int frame = 0;
  int eye = 0;
  int lip = 0;
  friend bool operator==(const StampCode&, const StampCode&) = default;
};

StampCode stamp_code(int frame_index, const RetargetParams& params);

// Reads the stamp block at (x, y, block) of an image. Returns nullopt when the
// block is not uniform.
std::optional<StampCode> decode_stamp(const RasterImage& image, int x = 0, int y = 0,
                                      int block = StampEngine::kBlock);

// Subprocess engine. One JSON request document on stdin, one response on
// stdout. A failed or timed-out call is retried once.
class ExternalEngine final : public ReenactmentEngine {
 public:
  ExternalEngine(std::string label, std::vector<std::string> argv,
                 std::chrono::milliseconds timeout = std::chrono::seconds(60), int max_concurrency = 1);

  bool available() const override;

 protected:
  RasterImage run(const RasterImage& source, const RasterImage& driving, int frame_index,
                  MotionMode mode, const RetargetParams& params) override;

 private:
  std::vector<std::string> argv_;
  std::chrono::milliseconds timeout_;
};

std::string external_request(const RasterImage& source, const RasterImage& driving, MotionMode mode,
                             const RetargetParams& params);

struct EngineListing {
  std::vector<EngineDescriptor> engines;
  std::vector<std::string> diagnostics;
};

class EngineRegistry {
 public:
  // Starts with identity and stamp.
  EngineRegistry();

  // "label=command args..." from configuration.
  void add_external(const std::string& config);
  void add(std::shared_ptr<ReenactmentEngine> engine);

  // Throws EngineUnknown for unknown or unreachable engines.
  std::shared_ptr<ReenactmentEngine> find(const std::string& name) const;

  EngineListing list_engines() const;

 private:
  std::map<std::string, std::shared_ptr<ReenactmentEngine>> engines_;
  std::vector<std::string> order_;
};

}  // namespace mexpr
