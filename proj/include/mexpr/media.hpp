#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "mexpr/session.hpp"

namespace mexpr {

inline constexpr int kLongPerformanceFrames = 300;

// Decodes one kind of driving media into frames (no decimation).
class MediaDecoder {
 public:
  virtual ~MediaDecoder() = default;
  virtual bool accepts(const std::filesystem::path& input) const = 0;
  virtual DrivingPerformance decode(const std::filesystem::path& input) const = 0;
};

// A directory of *.png frames in filename order.
class PngSequenceDecoder final : public MediaDecoder {
 public:
  bool accepts(const std::filesystem::path& input) const override;
  DrivingPerformance decode(const std::filesystem::path& input) const override;
};

// PNG directories always; video containers when built with OpenCV.
std::vector<std::shared_ptr<MediaDecoder>> default_decoders();

// Keeps every k-th frame. Without k, performances longer than 300 frames
// keep every 2nd frame. Throws UnreadableMedia, ZeroFrames.
DrivingPerformance ingest_performance(const std::filesystem::path& input,
                                      std::optional<int> keep_every = std::nullopt,
                                      const std::vector<std::shared_ptr<MediaDecoder>>& decoders =
                                          default_decoders());

DrivingPerformance decimate(DrivingPerformance performance, std::optional<int> keep_every);

}  // namespace mexpr
