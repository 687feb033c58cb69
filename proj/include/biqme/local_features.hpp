#pragma once

#include <array>

#include "biqme/image.hpp"

namespace biqme::local {

// Contrast-energy parameters. Channels are scaled to [0,1] (divided by 255)
// before filtering.
struct CeParams {
  double gauss_sigma = 1.0;
  double theta = 0.1;
  double phi_gr = 0.23;
  double phi_yb = 0.23;
  double phi_rg = 0.05;

  void validate() const;
};

struct ContrastEnergy {
  double gr = 0.0;
  double yb = 0.0;
  double rg = 0.0;
};

// Gaussian second-derivative responses, divisive normalization by the
// channel maximum, spatial mean, minus the noise threshold, clipped at 0.
// Gray images only produce the gr term.
ContrastEnergy contrast_energy(const RasterImage& img, const CeParams& params = {});
// Single plane already on the [0,1] scale; phi is that channel's threshold.
double contrast_energy_plane(const PlaneF& channel, const CeParams& params, double phi);

// Zero-sum sampled second derivative of a unit-sum Gaussian, radius ceil(3 sigma).
std::vector<double> gaussian_second_derivative_1d(double sigma);

// One decomposition level. LH is low-pass horizontally and high-pass
// vertically; HL the converse.
struct DwtLevel {
  PlaneF lh;
  PlaneF hl;
  PlaneF hh;
};

struct DwtPyramid {
  std::array<DwtLevel, 3> levels;  // levels[0] is the finest
  PlaneF ll;                       // coarsest approximation
  int width = 0;
  int height = 0;
};

// CDF 9/7 lifting, whole-sample symmetric extension, JPEG2000 normalization
// (low-pass DC gain 1, high-pass Nyquist gain 2).
void dwt97_forward_1d(std::span<double> x);
void dwt97_inverse_1d(std::span<double> x);

DwtPyramid dwt97_3level(const PlaneF& gray);
PlaneF dwt97_reconstruct(const DwtPyramid& pyr);

struct LogEnergy {
  double le2 = 0.0;
  double le3 = 0.0;
};

// log10(1 + mean square) per subband, HH weighted by hh_weight.
double subband_log_energy(const PlaneF& band);
double level_log_energy(const DwtLevel& level, double hh_weight = 4.0);
LogEnergy log_energy(const DwtPyramid& pyr, double hh_weight = 4.0);

}  // namespace biqme::local
