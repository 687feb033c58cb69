#pragma once

// Image substrate shared by every feature: raster and real-valued planes,
// color transforms, histograms, entropy and mirror-boundary convolution.

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace biqme {

// Smallest width/height accepted by the feature extraction entry points.
inline constexpr int kMinFeatureSize = 32;

// Decoded 8-bit image: interleaved RGB (channels = 3) or gray (channels = 1).
struct RasterImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  RasterImage() = default;
  RasterImage(int w, int h, int c);  // zero-filled, validated
  RasterImage(int w, int h, int c, std::vector<std::uint8_t> pixels);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  bool is_color() const { return channels == 3; }

  std::uint8_t at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool operator==(const RasterImage&) const = default;
};

// Throws InvalidArgument unless the image is at least kMinFeatureSize square.
void require_feature_size(const RasterImage& img);

// Real-valued plane, row-major.
class PlaneF {
 public:
  PlaneF() = default;
  PlaneF(int width, int height, double fill = 0.0);
  PlaneF(int width, int height, std::vector<double> samples);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double& operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<const double> samples() const { return data_; }
  std::span<double> samples() { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double mean() const;
  double min() const;
  double max() const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// 256-bin gray-level distribution, either raw counts or probability masses.
struct Histogram256 {
  std::array<double, 256> bins{};

  double total() const;
  bool is_normalized(double tol = 1e-9) const;
  Histogram256 normalized() const;
};

PlaneF to_gray(const RasterImage& img);
// yb = 0.5(R+G) - B, rg = R - G.
std::pair<PlaneF, PlaneF> opponent_channels(const RasterImage& img);
// HSV saturation (max-min)/max in [0,1], 0 where max = 0.
PlaneF saturation_plane(const RasterImage& img);
// Single channel of a raster as a plane.
PlaneF channel_plane(const RasterImage& img, int channel);

// Samples are rounded to the nearest level and clamped to [0,255]. Samples
// outside [0,255] (beyond a 1e-6 slack) or non-finite are rejected.
Histogram256 histogram(const PlaneF& p, bool normalized);
Histogram256 histogram(const RasterImage& gray_or_channel, int channel, bool normalized);

// Shannon entropy in bits of a normalized histogram.
double entropy(const Histogram256& h);

// Half-sample symmetric index reflection (... c b a | a b c ... c | c b a ...).
int mirror_index(int i, int n);

// True 2-D convolution with mirror boundary extension; odd kernel sizes only.
PlaneF convolve_2d(const PlaneF& p, const PlaneF& kernel);
// Row kernel then column kernel; equivalent to convolve_2d with their outer product.
PlaneF convolve_separable(const PlaneF& p, std::span<const double> row_kernel,
                          std::span<const double> col_kernel);

// Sampled Gaussian of the given sigma normalized to unit sum, radius ceil(3 sigma)
// unless given explicitly.
std::vector<double> gaussian_kernel_1d(double sigma, int radius = -1);

}  // namespace biqme
