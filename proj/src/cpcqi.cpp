#include "biqme/cpcqi.hpp"

#include <algorithm>
#include <cmath>

#include "biqme/error.hpp"

namespace biqme::cpcqi {

void Config::validate() const {
  if (patch_size < 1) throw InvalidArgument("cpcqi.patch must be positive");
  if (stride < 1) throw InvalidArgument("cpcqi.stride must be positive");
  if (!(c1 > 0.0 && c2 > 0.0 && c3 > 0.0)) throw InvalidArgument("cpcqi stabilizers must be positive");
  if (!(zeta > 0.0)) throw InvalidArgument("cpcqi.zeta must be positive");
  if (!(phi > 0.0)) throw InvalidArgument("cpcqi.phi must be positive");
}

PatchGrid patch_grid(const RasterImage& img, const Config& cfg) {
  cfg.validate();
  if (img.width < cfg.patch_size || img.height < cfg.patch_size)
    throw InvalidArgument("image smaller than the C-PCQI patch");

  const PlaneF gray = to_gray(img);
  const PlaneF sat = img.is_color() ? saturation_plane(img) : PlaneF(img.width, img.height, 0.0);

  PatchGrid grid;
  grid.patch_size = cfg.patch_size;
  grid.stride = cfg.stride;
  grid.cols = (img.width - cfg.patch_size) / cfg.stride + 1;
  grid.rows = (img.height - cfg.patch_size) / cfg.stride + 1;
  grid.patches.resize(static_cast<std::size_t>(grid.cols) * grid.rows);

  const int p = cfg.patch_size;
  const double area = static_cast<double>(p) * p;
  for (int gy = 0; gy < grid.rows; ++gy) {
    for (int gx = 0; gx < grid.cols; ++gx) {
      PatchStats& ps = grid.patches[static_cast<std::size_t>(gy) * grid.cols + gx];
      const int x0 = gx * cfg.stride, y0 = gy * cfg.stride;
      ps.structure.resize(static_cast<std::size_t>(p) * p);
      double sum = 0.0, sat_sum = 0.0;
      for (int y = 0; y < p; ++y)
        for (int x = 0; x < p; ++x) {
          sum += gray(x0 + x, y0 + y);
          sat_sum += sat(x0 + x, y0 + y);
        }
      ps.mean = sum / area;
      ps.saturation = sat_sum / area;

      double energy = 0.0;
      std::size_t k = 0;
      for (int y = 0; y < p; ++y)
        for (int x = 0; x < p; ++x, ++k) {
          const double d = gray(x0 + x, y0 + y) - ps.mean;
          ps.structure[k] = d;
          energy += d * d;
        }
      ps.strength = std::sqrt(energy / area);
      const double norm = std::sqrt(energy);
      if (norm > 1e-12) {
        for (double& v : ps.structure) v /= norm;
      } else {
        ps.strength = 0.0;
        std::fill(ps.structure.begin(), ps.structure.end(), 0.0);
      }
    }
  }
  return grid;
}

double saturation_similarity(double st1, double st2, double zeta, double phi) {
  const double ratio = (2.0 * st1 * st2 + zeta) / (st1 * st1 + st2 * st2 + zeta);
  return phi == 1.0 ? ratio : std::pow(ratio, phi);
}

PatchTerms patch_similarity(const PatchStats& ref, const PatchStats& dist, const Config& cfg) {
  PatchTerms t;
  t.mean_intensity = (2.0 * ref.mean * dist.mean + cfg.c1) / (ref.mean * ref.mean + dist.mean * dist.mean + cfg.c1);
  t.contrast_change = (2.0 * ref.strength * dist.strength + cfg.c2) /
                      (ref.strength * ref.strength + dist.strength * dist.strength + cfg.c2);
  double dot = 0.0;
  for (std::size_t i = 0; i < ref.structure.size(); ++i) dot += ref.structure[i] * dist.structure[i];
  // Two flat patches share structure trivially.
  if (ref.strength == 0.0 && dist.strength == 0.0) dot = 1.0;
  t.structure = std::clamp((dot + cfg.c3) / (1.0 + cfg.c3), 0.0, 1.0);
  t.saturation = saturation_similarity(ref.saturation, dist.saturation, cfg.zeta, cfg.phi);
  return t;
}

double cpcqi_score(const RasterImage& reference, const RasterImage& distorted, const Config& cfg) {
  if (reference.width != distorted.width || reference.height != distorted.height)
    throw DimensionMismatch("C-PCQI images differ in size: " + std::to_string(reference.width) + "x" +
                            std::to_string(reference.height) + " vs " + std::to_string(distorted.width) +
                            "x" + std::to_string(distorted.height));
  if (reference == distorted) return 1.0;

  const PatchGrid a = patch_grid(reference, cfg);
  const PatchGrid b = patch_grid(distorted, cfg);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.patches.size(); ++i) {
    const PatchTerms t = patch_similarity(a.patches[i], b.patches[i], cfg);
    acc += t.mean_intensity * t.contrast_change * t.structure * t.saturation;
  }
  return acc / static_cast<double>(a.patches.size());
}

}  // namespace biqme::cpcqi
