#include "biqme/phase_congruency.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <opencv2/core.hpp>

#include "biqme/error.hpp"

namespace biqme::pc {

namespace {

constexpr double kPi = std::numbers::pi;

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

// Mirror-padded, mean-removed copy of the plane as a CV_64F matrix. The
// filters have no DC response, so removing the mean changes nothing but
// makes a constant plane transform to exact zeros.
cv::Mat padded_zero_mean(const PlaneF& gray, int pw, int ph) {
  const int w = gray.width(), h = gray.height();
  const double mean = gray.mean();
  cv::Mat m(ph, pw, CV_64F);
  for (int y = 0; y < ph; ++y) {
    auto* row = m.ptr<double>(y);
    const int sy = mirror_index(y, h);
    for (int x = 0; x < pw; ++x) row[x] = gray(mirror_index(x, w), sy) - mean;
  }
  return m;
}

}  // namespace

void BankConfig::validate() const {
  if (scales < 2) throw InvalidArgument("pc.scales must be >= 2");
  if (orientations < 2) throw InvalidArgument("pc.orientations must be >= 2");
  if (min_wavelength < 3.0) throw InvalidArgument("pc.min_wavelength must be >= 3");
  if (!(multiplier > 1.0)) throw InvalidArgument("pc.multiplier must be > 1");
  if (!(sigma_on_f > 0.0 && sigma_on_f < 1.0)) throw InvalidArgument("pc.sigma_on_f must be in (0,1)");
  if (!(angular_ratio > 0.0)) throw InvalidArgument("pc.angular_ratio must be positive");
  if (!(lowpass_cutoff > 0.0 && lowpass_cutoff <= 0.5)) throw InvalidArgument("pc.lowpass_cutoff must be in (0,0.5]");
  if (lowpass_order < 1) throw InvalidArgument("pc.lowpass_order must be >= 1");
  if (!(k_noise >= 0.0)) throw InvalidArgument("pc.k_noise must be nonnegative");
  if (!(gain > 0.0)) throw InvalidArgument("pc.gain must be positive");
  if (!(epsilon > 0.0)) throw InvalidArgument("pc.epsilon must be positive");
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) throw InvalidArgument("pc.top_fraction must be in (0,1]");
}

int padded_size(int n) { return n % 2 == 0 ? n : n + 1; }

double LogGaborBank::center_frequency(int scale) const {
  return 1.0 / (cfg_.min_wavelength * std::pow(cfg_.multiplier, scale));
}

double LogGaborBank::orientation_angle(int orientation) const {
  return orientation * kPi / cfg_.orientations;
}

double LogGaborBank::frequency_x(int u) const {
  return (u < width_ / 2 ? u : u - width_) / static_cast<double>(width_);
}

double LogGaborBank::frequency_y(int v) const {
  return (v < height_ / 2 ? v : v - height_) / static_cast<double>(height_);
}

LogGaborBank LogGaborBank::build(const BankConfig& cfg, int width, int height) {
  cfg.validate();
  if (width < 2 || height < 2 || width % 2 || height % 2)
    throw InvalidArgument("log-Gabor bank needs even transform dimensions");

  LogGaborBank bank;
  bank.cfg_ = cfg;
  bank.width_ = width;
  bank.height_ = height;

  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<double> radius(n), sin_t(n), cos_t(n), lowpass(n);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const std::size_t i = static_cast<std::size_t>(v) * width + u;
      const double fx = bank.frequency_x(u);
      const double fy = -bank.frequency_y(v);  // y axis points up
      const double r = std::hypot(fx, fy);
      radius[i] = r;
      const double th = std::atan2(fy, fx);
      sin_t[i] = std::sin(th);
      cos_t[i] = std::cos(th);
      lowpass[i] = 1.0 / (1.0 + std::pow(r / cfg.lowpass_cutoff, 2.0 * cfg.lowpass_order));
    }
  }

  const double sigma_r = std::log(cfg.sigma_on_f);
  const double sigma_o = cfg.angular_ratio * kPi / cfg.orientations;

  bank.filters_.resize(static_cast<std::size_t>(cfg.scales) * cfg.orientations);
  for (int o = 0; o < cfg.orientations; ++o) {
    const double angle = bank.orientation_angle(o);
    const double ca = std::cos(angle), sa = std::sin(angle);
    std::vector<double> spread(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ds = sin_t[i] * ca - cos_t[i] * sa;
      const double dc = cos_t[i] * ca + sin_t[i] * sa;
      const double dtheta = std::abs(std::atan2(ds, dc));
      spread[i] = std::exp(-dtheta * dtheta / (2.0 * sigma_o * sigma_o));
    }
    for (int s = 0; s < cfg.scales; ++s) {
      const double f0 = bank.center_frequency(s);
      auto& f = bank.filters_[static_cast<std::size_t>(o) * cfg.scales + s];
      f.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (radius[i] == 0.0) {
          f[i] = 0.0;
          continue;
        }
        const double lr = std::log(radius[i] / f0);
        f[i] = std::exp(-lr * lr / (2.0 * sigma_r * sigma_r)) * lowpass[i] * spread[i];
      }
    }
  }
  return bank;
}

PcMap pc_map(const PlaneF& gray, const BankConfig& cfg) {
  return pc_map(gray, LogGaborBank::build(cfg, padded_size(gray.width()), padded_size(gray.height())));
}

PcMap pc_map(const PlaneF& gray, const LogGaborBank& bank) {
  const int w = gray.width(), h = gray.height();
  if (w < 2 || h < 2) throw InvalidArgument("phase congruency needs at least a 2x2 plane");
  const int pw = padded_size(w), ph = padded_size(h);
  if (bank.width() != pw || bank.height() != ph)
    throw DimensionMismatch("log-Gabor bank was built for a different image size");

  const BankConfig& cfg = bank.config();
  const int nscale = cfg.scales;
  const std::size_t npix = static_cast<std::size_t>(w) * h;

  cv::Mat spectrum;
  cv::dft(padded_zero_mean(gray, pw, ph), spectrum, cv::DFT_COMPLEX_OUTPUT);

  PcMap out{PlaneF(w, h), PlaneF(w, h)};
  auto pc_out = out.pc.samples();
  auto amp_out = out.amplitude.samples();

  std::vector<std::vector<double>> even(nscale, std::vector<double>(npix));
  std::vector<std::vector<double>> odd(nscale, std::vector<double>(npix));
  std::vector<double> sum_a(npix), max_a(npix), sum_e(npix), sum_o(npix), numer(npix);
  std::vector<double> noise_floor(nscale);
  cv::Mat product(ph, pw, CV_64FC2), response;

  for (int o = 0; o < cfg.orientations; ++o) {
    std::fill(sum_a.begin(), sum_a.end(), 0.0);
    std::fill(max_a.begin(), max_a.end(), 0.0);
    std::fill(sum_e.begin(), sum_e.end(), 0.0);
    std::fill(sum_o.begin(), sum_o.end(), 0.0);

    for (int s = 0; s < nscale; ++s) {
      const auto& filt = bank.filter(s, o);
      for (int y = 0; y < ph; ++y) {
        const auto* src = spectrum.ptr<cv::Vec2d>(y);
        auto* dst = product.ptr<cv::Vec2d>(y);
        const double* f = &filt[static_cast<std::size_t>(y) * pw];
        for (int x = 0; x < pw; ++x) dst[x] = src[x] * f[x];
      }
      cv::dft(product, response, cv::DFT_INVERSE | cv::DFT_SCALE);

      auto& e = even[s];
      auto& od = odd[s];
      for (int y = 0; y < h; ++y) {
        const auto* row = response.ptr<cv::Vec2d>(y);
        for (int x = 0; x < w; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * w + x;
          e[i] = row[x][0];
          od[i] = row[x][1];
          const double a = std::hypot(e[i], od[i]);
          sum_a[i] += a;
          max_a[i] = std::max(max_a[i], a);
          sum_e[i] += e[i];
          sum_o[i] += od[i];
        }
      }

      if (s == 0) {
        // Rayleigh noise model: median amplitude at the finest scale gives the
        // Rayleigh parameter; coarser scales see proportionally less noise.
        std::vector<double> a0(npix);
        for (std::size_t i = 0; i < npix; ++i) a0[i] = std::hypot(e[i], od[i]);
        const double tau = median_of(std::move(a0)) / std::sqrt(std::log(4.0));
        for (int n = 0; n < nscale; ++n) {
          const double tau_n = tau / std::pow(cfg.multiplier, n);
          noise_floor[n] = tau_n * (std::sqrt(kPi / 2.0) + cfg.k_noise * std::sqrt((4.0 - kPi) / 2.0));
        }
      }
    }

    std::fill(numer.begin(), numer.end(), 0.0);
    for (int s = 0; s < nscale; ++s) {
      const auto& e = even[s];
      const auto& od = odd[s];
      for (std::size_t i = 0; i < npix; ++i) {
        const double norm = std::hypot(sum_e[i], sum_o[i]) + cfg.epsilon;
        const double me = sum_e[i] / norm, mo = sum_o[i] / norm;
        // A_n * (cos(dphi) - |sin(dphi)|) against the mean phase.
        const double energy = e[i] * me + od[i] * mo - std::abs(e[i] * mo - od[i] * me);
        numer[i] += std::max(energy - noise_floor[s], 0.0);
      }
    }

    for (std::size_t i = 0; i < npix; ++i) {
      const double spread = (sum_a[i] / nscale) / (max_a[i] + cfg.epsilon);
      const double weight = 1.0 / (1.0 + std::exp((cfg.cutoff - spread) * cfg.gain));
      const double pc = weight * numer[i] / (cfg.epsilon + sum_a[i]);
      pc_out[i] += std::clamp(pc, 0.0, 1.0) / cfg.orientations;
      amp_out[i] += sum_a[i];
    }
  }
  return out;
}

double pc_entropy(const PlaneF& gray, const PcMap& pc, double top_fraction) {
  if (gray.width() != pc.pc.width() || gray.height() != pc.pc.height())
    throw DimensionMismatch("PC map and gray plane differ in size");
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) throw InvalidArgument("top_fraction must be in (0,1]");
  const auto values = pc.pc.samples();
  const std::size_t n = values.size();
  if (n == 0) return 0.0;

  std::size_t keep = static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(n)));
  keep = std::clamp<std::size_t>(keep, 1, n);
  std::vector<double> sorted(values.begin(), values.end());
  auto kth = sorted.begin() + static_cast<std::ptrdiff_t>(keep - 1);
  std::nth_element(sorted.begin(), kth, sorted.end(), std::greater<>());
  const double threshold = *kth;

  Histogram256 h;
  double count = 0.0;
  const auto g = gray.samples();
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i] < threshold) continue;
    const double v = g[i];
    if (!std::isfinite(v) || v < -1e-6 || v > 255.0 + 1e-6)
      throw InvalidArgument("gray sample out of [0,255]");
    h.bins[static_cast<std::size_t>(std::clamp(std::lround(v), 0L, 255L))] += 1.0;
    count += 1.0;
  }
  for (double& b : h.bins) b /= count;
  return entropy(h);
}

}  // namespace biqme::pc
