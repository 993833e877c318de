#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mexpr/codec.hpp"
#include "mexpr/composition.hpp"

namespace mexpr::testing {

namespace fs = std::filesystem;

fs::path fixture(const std::string& name) { return fs::path(MEXPR_FIXTURE_DIR) / name; }

TempDir::TempDir() {
  static std::mt19937_64 rng(std::random_device{}());
  path_ = fs::temp_directory_path() / ("mexpr-test-" + std::to_string(rng()));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

RasterImage smooth_panel(int width, int height, int channels, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 6.283);
  std::uniform_real_distribution<double> wavelength(90.0, 240.0);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  RasterImage image(width, height, channels);
  for (int c = 0; c < channels; ++c) {
    const double lx = wavelength(rng), ly = wavelength(rng), px = phase(rng), py = phase(rng);
    const double bx = pos(rng) * width, by = pos(rng) * height, br = 25.0 + 40.0 * pos(rng);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double d2 = ((x - bx) * (x - bx) + (y - by) * (y - by)) / (br * br);
        const double v = 128.0 + 55.0 * std::sin(6.283 * x / lx + px) + 40.0 * std::cos(6.283 * y / ly + py) -
                         30.0 * std::exp(-d2);
        image.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return image;
}

RasterImage noise_image(int width, int height, int channels, std::mt19937& rng) {
  std::uniform_int_distribution<int> value(0, 255);
  RasterImage image(width, height, channels);
  for (auto& p : image.pixels()) p = static_cast<std::uint8_t>(value(rng));
  return image;
}

RasterImage constant_image(int width, int height, int channels, std::uint8_t value) {
  return RasterImage(width, height, channels, value);
}

RasterImage oracle_resample(const RasterImage& src, int x0, int y0, int side, int out_size) {
  RasterImage out(out_size, out_size, src.channels());
  const long double ratio = static_cast<long double>(side) / out_size;
  auto source_coord = [&](int i) {
    long double s = (i + 0.5L) * ratio - 0.5L;
    if (s < 0) s = 0;
    if (s > side - 1) s = side - 1;
    return s;
  };
  for (int j = 0; j < out_size; ++j) {
    const long double sy = source_coord(j);
    const int ya = static_cast<int>(sy);
    const int yb = std::min(ya + 1, side - 1);
    const long double fy = sy - ya;
    for (int i = 0; i < out_size; ++i) {
      const long double sx = source_coord(i);
      const int xa = static_cast<int>(sx);
      const int xb = std::min(xa + 1, side - 1);
      const long double fx = sx - xa;
      for (int c = 0; c < src.channels(); ++c) {
        const long double left = src.at(x0 + xa, y0 + ya, c) + fy * (src.at(x0 + xa, y0 + yb, c) - src.at(x0 + xa, y0 + ya, c));
        const long double right = src.at(x0 + xb, y0 + ya, c) + fy * (src.at(x0 + xb, y0 + yb, c) - src.at(x0 + xb, y0 + ya, c));
        const long double v = left + fx * (right - left);
        out.at(i, j, c) = static_cast<std::uint8_t>(std::clamp(std::llround(v), 0LL, 255LL));
      }
    }
  }
  return out;
}

BBox brute_force_hull(const std::vector<Point2D>& points) {
  double lo_x = points.at(0).x, hi_x = points.at(0).x, lo_y = points.at(0).y, hi_y = points.at(0).y;
  for (const auto& p : points) {
    if (p.x < lo_x) lo_x = p.x;
    if (p.x > hi_x) hi_x = p.x;
    if (p.y < lo_y) lo_y = p.y;
    if (p.y > hi_y) hi_y = p.y;
  }
  return {lo_x, lo_y, hi_x - lo_x, hi_y - lo_y};
}

std::vector<Point2D> random_landmarks(std::mt19937& rng, double x, double y, double w, double h) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2D> points;
  for (int i = 0; i < kLandmarkCount; ++i) points.push_back({x + u(rng) * w, y + u(rng) * h});
  return points;
}

std::vector<Point2D> hull_landmarks(const BBox& box) {
  std::vector<Point2D> points{{box.x, box.y}, {box.x + box.width, box.y + box.height}};
  for (int i = 2; i < kLandmarkCount; ++i) {
    const double t = static_cast<double>(i) / kLandmarkCount;
    points.push_back({box.x + t * box.width, box.y + (1.0 - t) * box.height});
  }
  return points;
}

DrivingPerformance synthetic_performance(int frames, int width, int height) {
  DrivingPerformance p;
  p.source_label = "synthetic";
  for (int i = 0; i < frames; ++i) p.frames.emplace_back(width, height, 3, static_cast<std::uint8_t>(i * 20));
  return p;
}

double mean_abs_diff(const RasterImage& a, const RasterImage& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) sum += std::abs(int(a.data()[i]) - int(b.data()[i]));
  return sum / static_cast<double>(a.data().size());
}

Project sample_project() {
  Project project;
  project.project_id = "sample";
  const RasterImage a = smooth_panel(640, 480, 3, 21);
  const RasterImage b = smooth_panel(300, 260, 1, 22);
  project.panels.push_back({"panel-1", project.add_asset(encode_png(a)), 640, 480, 3});
  project.panels.push_back({"panel-2", project.add_asset(encode_png(b)), 300, 260, 1});

  const std::vector<DetectedFace> faces{
      {LandmarkSet(hull_landmarks({60.25, 80.5, 200, 230})), 0.97, 10.0, std::nullopt},
      {LandmarkSet(hull_landmarks({420, 100, 80, 90})), 0.88, -20.0, std::nullopt}};
  auto prepared = prepare_regions(faces, "panel-1", 640, 480, project.settings);
  for (auto& r : prepared.regions) project.regions.push_back(r);
  project.regions.push_back(manual_frame("panel-2", 300, 260, {40, 30, 150, 120}, project.settings, 0));

  std::vector<MappedFace> mapped;
  StampEngine stamp;
  for (int i = 0; i < 2; ++i) {
    const PreparedRegion& r = project.regions[static_cast<std::size_t>(i)];
    const RasterImage crop = extract_crop(a, r.crop_spec);
    const RetargetParams params{0.25 * (i + 1), i == 0 ? std::optional<double>() : std::optional<double>(0.8)};
    const ReenactedFrame frame = reenact(stamp, crop, crop, 3 + i, MotionMode::kRelative, params);
    mapped.push_back({r.crop_spec, frame.image, {"stamp", 3 + i, MotionMode::kRelative, params}});
    project.mapped.push_back({"mapped-" + std::to_string(i + 1), r.crop_spec, mapped.back().provenance,
                              project.add_asset(encode_png(frame.image))});
  }
  const ComposedPanel composed = compose(a, "panel-1", mapped, 3);
  project.compositions.push_back({"composed-1", "panel-1", project.add_asset(encode_png(composed.image)), 3,
                                  {"mapped-1", "mapped-2"}, composed.seams});
  return project;
}

}  // namespace mexpr::testing
