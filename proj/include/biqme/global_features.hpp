#pragma once

#include <array>
#include <span>

#include "biqme/image.hpp"

namespace biqme::global {

struct BrightnessConfig {
  std::array<double, 6> multipliers{3.5, 5.5, 7.5, 1.0 / 3.5, 1.0 / 5.5, 1.0 / 7.5};
  double lower = 0.0;
  double upper = 255.0;

  void validate() const;
};

// Entropy of clamp(m * gray, lower, upper) for each multiplier, in order.
std::array<double, 6> brightness_entropies(const PlaneF& gray, const BrightnessConfig& cfg = {});

struct Colorfulness {
  double saturation = 0.0;  // S: mean HSV saturation
  double hasler = 0.0;      // C: opponent-channel colorfulness
};

inline constexpr double kColorfulnessKappa = 0.3;

Colorfulness colorfulness_pair(const RasterImage& img);

struct MscnConfig {
  int window = 7;
  double sigma = 7.0 / 6.0;
  double epsilon = 1.0;

  void validate() const;
};

// Mean-subtracted contrast-normalized coefficients with Gaussian-weighted
// local moments and mirror boundaries.
PlaneF mscn(const PlaneF& gray, const MscnConfig& cfg = {});

inline constexpr double kGgdShapeMin = 0.2;
inline constexpr double kGgdShapeMax = 10.0;
inline constexpr std::size_t kGgdMinSamples = 1000;

struct GgdFit {
  double nu = 2.0;
  double sigma2 = 0.0;
  bool clamped = false;     // moment ratio fell outside the shape bounds
  bool degenerate = false;  // set only by callers that bypass the fit
};

// Gamma(1/nu) Gamma(3/nu) / Gamma(2/nu)^2, decreasing in nu.
double ggd_moment_ratio(double nu);
// Inverse of ggd_moment_ratio on [kGgdShapeMin, kGgdShapeMax]; clamps and
// reports through `clamped`.
double invert_ggd_ratio(double ratio, bool* clamped = nullptr);

// Zero-mean GGD by moment matching. Needs >= 1000 samples, not all equal.
GgdFit ggd_fit(std::span<const double> samples);

// Mean over pixels of min(R,G,B)/255.
double dark_channel_mean(const RasterImage& img);

}  // namespace biqme::global
