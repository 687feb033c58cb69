#pragma once

// Log-Gabor filter bank, phase congruency map and the PC-weighted entropy.

#include <vector>

#include "biqme/image.hpp"

namespace biqme::pc {

struct BankConfig {
  int scales = 4;
  int orientations = 4;
  double min_wavelength = 6.0;
  double multiplier = 2.0;
  // Ratio of the radial Gaussian's standard deviation to the center frequency
  // in log space; sigma_r = |ln(sigma_on_f)|.
  double sigma_on_f = 0.55;
  // Angular sigma as a fraction of the orientation spacing pi/K.
  double angular_ratio = 0.55;
  // Butterworth low-pass applied to every filter (cutoff in cycles/pixel, order).
  double lowpass_cutoff = 0.45;
  int lowpass_order = 15;
  // Noise floor multiplier on the Rayleigh noise spread.
  double k_noise = 2.0;
  // Frequency-spread sigmoid: cut-off u and gain v.
  double cutoff = 0.5;
  double gain = 10.0;
  double epsilon = 1e-4;
  // Fraction of highest-PC pixels feeding the PC entropy.
  double top_fraction = 0.4;

  void validate() const;
};

// Frequency-domain filters for one padded image size. Filters are real,
// nonnegative, zero at DC and one-sided in angle, so the inverse transform of
// (image spectrum x filter) yields the even (real) and odd (imag) responses.
class LogGaborBank {
 public:
  // width/height are the padded (even) sizes of the transform.
  static LogGaborBank build(const BankConfig& cfg, int width, int height);

  const BankConfig& config() const { return cfg_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t filter_count() const { return filters_.size(); }

  // Filter for (scale, orientation), row-major over the unshifted FFT grid.
  const std::vector<double>& filter(int scale, int orientation) const {
    return filters_[static_cast<std::size_t>(orientation) * cfg_.scales + scale];
  }
  double center_frequency(int scale) const;
  double orientation_angle(int orientation) const;

  // Normalized frequency coordinates (cycles/pixel) of FFT bin (u, v).
  double frequency_x(int u) const;
  double frequency_y(int v) const;

 private:
  BankConfig cfg_;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::vector<double>> filters_;
};

// Padded transform size used for an image: the next even size in each axis.
int padded_size(int n);

struct PcMap {
  PlaneF pc;          // per-pixel phase congruency in [0,1]
  PlaneF amplitude;   // per-pixel sum of A_n over scales and orientations
};

PcMap pc_map(const PlaneF& gray, const LogGaborBank& bank);
PcMap pc_map(const PlaneF& gray, const BankConfig& cfg = {});

// Entropy (bits) of the gray levels at pixels whose PC is among the top
// `top_fraction`; ties at the threshold are included.
double pc_entropy(const PlaneF& gray, const PcMap& pc, double top_fraction = 0.4);

}  // namespace biqme::pc
