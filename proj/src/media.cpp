#include "mexpr/media.hpp"

#include <algorithm>

#include "mexpr/codec.hpp"
#include "mexpr/error.hpp"

namespace mexpr {

#ifdef MEXPR_HAVE_OPENCV
std::shared_ptr<MediaDecoder> make_video_decoder();
#endif

namespace fs = std::filesystem;

bool PngSequenceDecoder::accepts(const fs::path& input) const {
  std::error_code ec;
  return fs::is_directory(input, ec);
}

DrivingPerformance PngSequenceDecoder::decode(const fs::path& input) const {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(input, ec)) {
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (entry.is_regular_file() && ext == ".png") files.push_back(entry.path());
  }
  if (ec) fail(ErrorCode::kUnreadableMedia, "cannot list " + input.string() + ": " + ec.message());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  DrivingPerformance performance;
  performance.source_label = input.string();
  for (const auto& f : files) performance.frames.push_back(read_png(f));
  return performance;
}

std::vector<std::shared_ptr<MediaDecoder>> default_decoders() {
  std::vector<std::shared_ptr<MediaDecoder>> decoders{std::make_shared<PngSequenceDecoder>()};
#ifdef MEXPR_HAVE_OPENCV
  decoders.push_back(make_video_decoder());
#endif
  return decoders;
}

DrivingPerformance decimate(DrivingPerformance performance, std::optional<int> keep_every) {
  const int total = static_cast<int>(performance.frames.size());
  const int k = keep_every.value_or(total > kLongPerformanceFrames ? 2 : 1);
  if (k < 1) fail(ErrorCode::kInvalidArgument, "decimation factor must be >= 1");
  if (k == 1) return performance;
  std::vector<RasterImage> kept;
  for (int i = 0; i < total; i += k) kept.push_back(std::move(performance.frames[i]));
  performance.frames = std::move(kept);
  if (performance.fps_hint) *performance.fps_hint /= k;
  return performance;
}

DrivingPerformance ingest_performance(const fs::path& input, std::optional<int> keep_every,
                                      const std::vector<std::shared_ptr<MediaDecoder>>& decoders) {
  if (keep_every && *keep_every < 1) fail(ErrorCode::kInvalidArgument, "decimation factor must be >= 1");
  std::error_code ec;
  if (!fs::exists(input, ec)) fail(ErrorCode::kUnreadableMedia, "no such media: " + input.string());
  for (const auto& decoder : decoders) {
    if (!decoder->accepts(input)) continue;
    DrivingPerformance performance = decoder->decode(input);
    if (performance.frames.empty()) fail(ErrorCode::kZeroFrames, "no frames in " + input.string());
    validate(performance);
    return decimate(std::move(performance), keep_every);
  }
  fail(ErrorCode::kUnreadableMedia, "no decoder accepts " + input.string());
}

}  // namespace mexpr
