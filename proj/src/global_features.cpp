#include "biqme/global_features.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "biqme/error.hpp"

namespace biqme::global {

void BrightnessConfig::validate() const {
  for (double m : multipliers)
    if (!(m > 0.0)) throw InvalidArgument("brightness multipliers must be positive");
  if (!(lower < upper)) throw InvalidArgument("brightness bounds need lower < upper");
  if (lower < 0.0 || upper > 255.0) throw InvalidArgument("brightness bounds must lie in [0,255]");
}

std::array<double, 6> brightness_entropies(const PlaneF& gray, const BrightnessConfig& cfg) {
  cfg.validate();
  std::array<double, 6> out{};
  PlaneF scaled(gray.width(), gray.height());
  const auto src = gray.samples();
  auto dst = scaled.samples();
  for (std::size_t k = 0; k < cfg.multipliers.size(); ++k) {
    for (std::size_t i = 0; i < src.size(); ++i)
      dst[i] = std::clamp(cfg.multipliers[k] * src[i], cfg.lower, cfg.upper);
    out[k] = entropy(histogram(scaled, true));
  }
  return out;
}

Colorfulness colorfulness_pair(const RasterImage& img) {
  if (img.channels != 3) throw InvalidArgument("colorfulness needs a 3-channel image");
  Colorfulness c;
  c.saturation = saturation_plane(img).mean();

  const auto [yb, rg] = opponent_channels(img);
  auto moments = [](const PlaneF& p) {
    const double mu = p.mean();
    double var = 0.0;
    for (double v : p.samples()) var += (v - mu) * (v - mu);
    return std::pair{mu, var / static_cast<double>(p.size())};
  };
  const auto [mu_yb, var_yb] = moments(yb);
  const auto [mu_rg, var_rg] = moments(rg);
  c.hasler = std::sqrt(var_yb + var_rg) + kColorfulnessKappa * std::sqrt(mu_yb * mu_yb + mu_rg * mu_rg);
  return c;
}

void MscnConfig::validate() const {
  if (window < 1 || window % 2 == 0) throw InvalidArgument("nss.window must be odd and positive");
  if (!(sigma > 0.0)) throw InvalidArgument("nss.sigma must be positive");
  if (!(epsilon > 0.0)) throw InvalidArgument("nss.epsilon must be positive");
}

PlaneF mscn(const PlaneF& gray, const MscnConfig& cfg) {
  cfg.validate();
  const auto g = gaussian_kernel_1d(cfg.sigma, cfg.window / 2);
  const PlaneF mu = convolve_separable(gray, g, g);
  PlaneF sq(gray.width(), gray.height());
  {
    const auto s = gray.samples();
    auto d = sq.samples();
    for (std::size_t i = 0; i < s.size(); ++i) d[i] = s[i] * s[i];
  }
  const PlaneF mu_sq = convolve_separable(sq, g, g);

  PlaneF out(gray.width(), gray.height());
  const auto s = gray.samples();
  const auto m = mu.samples();
  const auto m2 = mu_sq.samples();
  auto d = out.samples();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double sigma = std::sqrt(std::max(m2[i] - m[i] * m[i], 0.0));
    d[i] = (s[i] - m[i]) / (sigma + cfg.epsilon);
  }
  return out;
}

double ggd_moment_ratio(double nu) {
  return std::exp(std::lgamma(1.0 / nu) + std::lgamma(3.0 / nu) - 2.0 * std::lgamma(2.0 / nu));
}

double invert_ggd_ratio(double ratio, bool* clamped) {
  // Coarse lookup on a log-spaced grid brackets the root; bisection refines.
  static const std::vector<std::pair<double, double>> table = [] {
    std::vector<std::pair<double, double>> t;
    constexpr int kSteps = 512;
    const double lo = std::log(kGgdShapeMin), hi = std::log(kGgdShapeMax);
    for (int i = 0; i <= kSteps; ++i) {
      const double nu = std::exp(lo + (hi - lo) * i / kSteps);
      t.emplace_back(nu, ggd_moment_ratio(nu));
    }
    return t;
  }();

  if (clamped) *clamped = false;
  if (!(ratio < table.front().second)) {
    if (clamped) *clamped = true;
    return kGgdShapeMin;
  }
  if (!(ratio > table.back().second)) {
    if (clamped) *clamped = true;
    return kGgdShapeMax;
  }
  // Ratios decrease along the table.
  auto it = std::partition_point(table.begin(), table.end(),
                                 [ratio](const auto& e) { return e.second > ratio; });
  double lo = std::prev(it)->first, hi = it->first;
  for (int iter = 0; iter < 200 && hi - lo > 1e-14 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (ggd_moment_ratio(mid) > ratio)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

GgdFit ggd_fit(std::span<const double> samples) {
  if (samples.size() < kGgdMinSamples)
    throw InvalidArgument("GGD fit needs at least " + std::to_string(kGgdMinSamples) + " samples");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  if (*mn == *mx) throw InvalidArgument("GGD fit needs samples that are not all equal");

  double abs_sum = 0.0, sq_sum = 0.0;
  for (double v : samples) {
    abs_sum += std::abs(v);
    sq_sum += v * v;
  }
  const double n = static_cast<double>(samples.size());
  const double m1 = abs_sum / n, m2 = sq_sum / n;

  GgdFit fit;
  fit.sigma2 = m2;
  if (m1 == 0.0) {
    fit.nu = kGgdShapeMin;
    fit.clamped = true;
    return fit;
  }
  fit.nu = invert_ggd_ratio(m2 / (m1 * m1), &fit.clamped);
  return fit;
}

double dark_channel_mean(const RasterImage& img) {
  if (img.channels != 3) throw InvalidArgument("dark channel needs a 3-channel image");
  const std::size_t n = img.pixel_count();
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += std::min({img.data[3 * i], img.data[3 * i + 1], img.data[3 * i + 2]});
  return acc / (255.0 * static_cast<double>(n));
}

}  // namespace biqme::global
