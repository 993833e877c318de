#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mexpr/geometry.hpp"
#include "mexpr/image.hpp"
#include "mexpr/project_store.hpp"
#include "mexpr/session.hpp"

namespace mexpr::testing {

std::filesystem::path fixture(const std::string& name);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Low-frequency synthetic panel (sinusoids plus soft blobs).
RasterImage smooth_panel(int width, int height, int channels, unsigned seed);
RasterImage noise_image(int width, int height, int channels, std::mt19937& rng);
RasterImage constant_image(int width, int height, int channels, std::uint8_t value);

// Independent bilinear resampler: long double, lerp along y first, then x.
RasterImage oracle_resample(const RasterImage& src, int x, int y, int side, int out_size);

// Linear-scan min/max over the points.
BBox brute_force_hull(const std::vector<Point2D>& points);

std::vector<Point2D> random_landmarks(std::mt19937& rng, double x, double y, double w, double h);

// 106 points whose hull is exactly the given box.
std::vector<Point2D> hull_landmarks(const BBox& box);

DrivingPerformance synthetic_performance(int frames, int width = 64, int height = 48);

double mean_abs_diff(const RasterImage& a, const RasterImage& b);

// Two panels, three regions, two mapped faces and one composition, built
// through the real pipeline.
Project sample_project();

}  // namespace mexpr::testing
