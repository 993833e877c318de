#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include <cstring>

#include "mexpr/error.hpp"
#include "mexpr/media.hpp"

namespace mexpr {

namespace {

class VideoDecoder final : public MediaDecoder {
 public:
  bool accepts(const std::filesystem::path& input) const override {
    std::error_code ec;
    return std::filesystem::is_regular_file(input, ec);
  }

  DrivingPerformance decode(const std::filesystem::path& input) const override {
    cv::VideoCapture capture(input.string());
    if (!capture.isOpened()) fail(ErrorCode::kUnreadableMedia, "cannot open video " + input.string());
    DrivingPerformance performance;
    performance.source_label = input.string();
    const double fps = capture.get(cv::CAP_PROP_FPS);
    if (fps > 0.0) performance.fps_hint = fps;
    cv::Mat bgr, rgb;
    while (capture.read(bgr)) {
      cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
      std::vector<std::uint8_t> data(rgb.total() * 3);
      for (int y = 0; y < rgb.rows; ++y) {
        std::memcpy(data.data() + static_cast<std::size_t>(y) * rgb.cols * 3, rgb.ptr(y),
                    static_cast<std::size_t>(rgb.cols) * 3);
      }
      performance.frames.emplace_back(rgb.cols, rgb.rows, 3, std::move(data));
    }
    return performance;
  }
};

}  // namespace

std::shared_ptr<MediaDecoder> make_video_decoder() { return std::make_shared<VideoDecoder>(); }

}  // namespace mexpr
