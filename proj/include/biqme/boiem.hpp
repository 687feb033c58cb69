#pragma once

// Quality-optimized two-stage enhancer: adaptive gamma correction with a
// weighted distribution, then histogram matching against a blended target.
// Each stage tries three candidates and keeps the one the blind quality
// model scores highest, six evaluations in total.

#include <array>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "biqme/features.hpp"
#include "biqme/image.hpp"
#include "biqme/svr.hpp"

namespace biqme::boiem {

struct Config {
  std::vector<double> lambda_b{0.3, 0.5, 0.7};
  std::vector<std::pair<double, double>> lambda_pairs{{1, 1}, {4, 2}, {8, 4}};  // (lambda_e, lambda_s)
  double rayleigh_scale = 64.0;

  // Exactly three candidates per stage, all positive, lambda_b <= 1.
  void validate() const;
};

struct GrayLut {
  std::array<std::uint8_t, 256> map{};
  bool degenerate = false;  // single-level input; identity returned

  static GrayLut identity();
};

// Brightness-rectifying gamma curve T(z) = 255 (z/255)^(1 - CDF'(z)) with the
// CDF taken over the weighted histogram. `h` must be normalized.
GrayLut agcwd_lut(const Histogram256& h, double lambda_b);
// The same curve before rounding, for inspection.
std::array<double, 256> agcwd_curve(const Histogram256& h, double lambda_b, bool* degenerate = nullptr);

// Discretized Rayleigh density on [0,255], normalized.
Histogram256 rayleigh_histogram(double scale);

// (uniform + le h_e + ls h_s) / (1 + le + ls)
Histogram256 rice_target_histogram(const Histogram256& h_e, double lambda_e, double lambda_s,
                                   const Config& cfg = {});

// Right-continuous inverse-CDF matching: m(z) = min{y : CDF_t(y) >= CDF_s(z)}.
GrayLut histogram_match(const Histogram256& source, const Histogram256& target);
GrayLut histogram_match(const PlaneF& gray, const Histogram256& target);

// HSV value channel max(R,G,B) (or the gray plane).
PlaneF value_channel(const RasterImage& img);
// Remaps the value channel and rescales RGB so hue and saturation are kept.
RasterImage apply_value_lut(const RasterImage& img, const GrayLut& lut);

using Scorer = std::function<double(const RasterImage&)>;

struct Result {
  RasterImage image;
  double lambda_b = 0.0;
  double lambda_e = 0.0;
  double lambda_s = 0.0;
  // Stage-1 candidates then stage-2 candidates, in config order.
  std::array<double, 6> scores{};
  bool agcwd_degenerate = false;
};

// `score` is called exactly six times; with jobs > 1 the three calls of a
// stage may run concurrently, so it must be thread-safe.
Result enhance(const RasterImage& img, const Config& cfg, const Scorer& score, int jobs = 1);

// Blind quality score of an image: features then regression.
double biqme_score(const RasterImage& img, const svr::SvrModel& model, const FeatureConfig& fcfg = {});
Result enhance(const RasterImage& img, const Config& cfg, const svr::SvrModel& model,
               const FeatureConfig& fcfg = {}, int jobs = 1);

}  // namespace biqme::boiem
