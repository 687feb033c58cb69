#pragma once

// Colorfulness-aware patch contrast quality index: a full-reference metric
// comparing patch mean, signal strength, structure and color saturation.
// Used to label synthetic training images.

#include <vector>

#include "biqme/image.hpp"

namespace biqme::cpcqi {

struct Config {
  int patch_size = 11;
  int stride = 4;
  double c1 = (0.01 * 255) * (0.01 * 255);
  double c2 = (0.03 * 255) * (0.03 * 255);
  double c3 = (0.03 * 255) * (0.03 * 255) / 2.0;
  double zeta = 1e-3;
  double phi = 1.0;

  void validate() const;
};

// Per-patch decomposition of one image.
struct PatchStats {
  double mean = 0.0;
  double strength = 0.0;           // RMS of the mean-removed patch
  std::vector<double> structure;   // unit vector, or all zeros when strength = 0
  double saturation = 0.0;         // mean HSV saturation over the patch
};

struct PatchGrid {
  int patch_size = 0;
  int stride = 0;
  int cols = 0;
  int rows = 0;
  std::vector<PatchStats> patches;  // row-major over grid positions
};

PatchGrid patch_grid(const RasterImage& img, const Config& cfg = {});

// ((2 a b + zeta) / (a^2 + b^2 + zeta))^phi
double saturation_similarity(double st1, double st2, double zeta = 1e-3, double phi = 1.0);

struct PatchTerms {
  double mean_intensity = 1.0;
  double contrast_change = 1.0;
  double structure = 1.0;
  double saturation = 1.0;
};

PatchTerms patch_similarity(const PatchStats& ref, const PatchStats& dist, const Config& cfg);

// Mean over the patch grid of the product of the four similarity terms.
double cpcqi_score(const RasterImage& reference, const RasterImage& distorted, const Config& cfg = {});

}  // namespace biqme::cpcqi
