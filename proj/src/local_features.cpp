#include "biqme/local_features.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "biqme/error.hpp"

namespace biqme::local {

namespace {

// CDF 9/7 lifting coefficients.
constexpr double kAlpha = -1.586134342059924;
constexpr double kBeta = -0.052980118572961;
constexpr double kGamma = 0.882911075530934;
constexpr double kDelta = 0.443506852043971;
constexpr double kScale = 1.230174104914001;

void lift(std::span<double> x, int parity, double c) {
  const int n = static_cast<int>(x.size());
  for (int i = parity; i < n; i += 2) {
    const double left = x[i - 1 >= 0 ? i - 1 : 1];
    const double right = x[i + 1 < n ? i + 1 : n - 2];
    x[i] += c * (left + right);
  }
}

PlaneF crop(const PlaneF& p, int x0, int y0, int w, int h) {
  PlaneF out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(x, y) = p(x0 + x, y0 + y);
  return out;
}

void paste(PlaneF& dst, const PlaneF& src, int x0, int y0) {
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) dst(x0 + x, y0 + y) = src(x, y);
}

// Transforms rows then columns of the top-left w x h region in place.
void forward_2d(PlaneF& p, int w, int h) {
  std::vector<double> buf(static_cast<std::size_t>(std::max(w, h)));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) buf[x] = p(x, y);
    dwt97_forward_1d(std::span(buf.data(), w));
    for (int x = 0; x < w; ++x) p(x, y) = buf[x];
  }
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) buf[y] = p(x, y);
    dwt97_forward_1d(std::span(buf.data(), h));
    for (int y = 0; y < h; ++y) p(x, y) = buf[y];
  }
}

void inverse_2d(PlaneF& p, int w, int h) {
  std::vector<double> buf(static_cast<std::size_t>(std::max(w, h)));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) buf[y] = p(x, y);
    dwt97_inverse_1d(std::span(buf.data(), h));
    for (int y = 0; y < h; ++y) p(x, y) = buf[y];
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) buf[x] = p(x, y);
    dwt97_inverse_1d(std::span(buf.data(), w));
    for (int x = 0; x < w; ++x) p(x, y) = buf[x];
  }
}

}  // namespace

void CeParams::validate() const {
  if (!(gauss_sigma > 0.0)) throw InvalidArgument("ce.sigma must be positive");
  if (!(theta > 0.0)) throw InvalidArgument("ce.theta must be positive");
  if (!(phi_gr >= 0.0 && phi_yb >= 0.0 && phi_rg >= 0.0))
    throw InvalidArgument("ce.phi_* must be nonnegative");
}

std::vector<double> gaussian_second_derivative_1d(double sigma) {
  const auto g = gaussian_kernel_1d(sigma);
  const int r = static_cast<int>(g.size() / 2);
  std::vector<double> d2(g.size());
  double mean = 0.0;
  for (int i = -r; i <= r; ++i) {
    d2[i + r] = (static_cast<double>(i) * i / (sigma * sigma) - 1.0) / (sigma * sigma) * g[i + r];
    mean += d2[i + r];
  }
  mean /= static_cast<double>(d2.size());
  for (double& v : d2) v -= mean;
  return d2;
}

double contrast_energy_plane(const PlaneF& channel, const CeParams& params, double phi) {
  params.validate();
  const auto g = gaussian_kernel_1d(params.gauss_sigma);
  const auto d2 = gaussian_second_derivative_1d(params.gauss_sigma);
  const PlaneF fh = convolve_separable(channel, d2, g);
  const PlaneF fv = convolve_separable(channel, g, d2);

  const auto h = fh.samples();
  const auto v = fv.samples();
  std::vector<double> y(h.size());
  double alpha = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = std::hypot(h[i], v[i]);
    alpha = std::max(alpha, y[i]);
  }
  // A flat channel has no contrast; avoid the 0/0.
  if (alpha < 1e-12 || y.empty()) return 0.0;

  double acc = 0.0;
  for (double yi : y) acc += alpha * yi / (yi + alpha * params.theta);
  const double ce = acc / static_cast<double>(y.size()) - phi;
  return std::max(ce, 0.0);
}

ContrastEnergy contrast_energy(const RasterImage& img, const CeParams& params) {
  ContrastEnergy ce;
  PlaneF gray = to_gray(img);
  for (double& v : gray.samples()) v /= 255.0;
  ce.gr = contrast_energy_plane(gray, params, params.phi_gr);
  if (img.channels != 3) return ce;

  auto [yb, rg] = opponent_channels(img);
  for (double& v : yb.samples()) v /= 255.0;
  for (double& v : rg.samples()) v /= 255.0;
  ce.yb = contrast_energy_plane(yb, params, params.phi_yb);
  ce.rg = contrast_energy_plane(rg, params, params.phi_rg);
  return ce;
}

void dwt97_forward_1d(std::span<double> x) {
  const std::size_t n = x.size();
  if (n < 2) return;
  lift(x, 1, kAlpha);
  lift(x, 0, kBeta);
  lift(x, 1, kGamma);
  lift(x, 0, kDelta);
  std::vector<double> tmp(n);
  const std::size_t nlow = (n + 1) / 2;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 2 == 0)
      tmp[i / 2] = x[i] / kScale;
    else
      tmp[nlow + i / 2] = x[i] * kScale;
  }
  std::copy(tmp.begin(), tmp.end(), x.begin());
}

void dwt97_inverse_1d(std::span<double> x) {
  const std::size_t n = x.size();
  if (n < 2) return;
  std::vector<double> tmp(n);
  const std::size_t nlow = (n + 1) / 2;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 2 == 0)
      tmp[i] = x[i / 2] * kScale;
    else
      tmp[i] = x[nlow + i / 2] / kScale;
  }
  std::copy(tmp.begin(), tmp.end(), x.begin());
  lift(x, 0, -kDelta);
  lift(x, 1, -kGamma);
  lift(x, 0, -kBeta);
  lift(x, 1, -kAlpha);
}

DwtPyramid dwt97_3level(const PlaneF& gray) {
  if (gray.width() < kMinFeatureSize || gray.height() < kMinFeatureSize)
    throw InvalidArgument("3-level DWT needs at least a 32x32 plane");
  DwtPyramid pyr;
  pyr.width = gray.width();
  pyr.height = gray.height();

  PlaneF work = gray;
  int w = gray.width(), h = gray.height();
  for (int level = 0; level < 3; ++level) {
    forward_2d(work, w, h);
    const int lw = (w + 1) / 2, lh = (h + 1) / 2;
    const int hw = w / 2, hh = h / 2;
    pyr.levels[level].lh = crop(work, 0, lh, lw, hh);
    pyr.levels[level].hl = crop(work, lw, 0, hw, lh);
    pyr.levels[level].hh = crop(work, lw, lh, hw, hh);
    w = lw;
    h = lh;
  }
  pyr.ll = crop(work, 0, 0, w, h);
  return pyr;
}

PlaneF dwt97_reconstruct(const DwtPyramid& pyr) {
  PlaneF work(pyr.width, pyr.height);
  std::array<int, 4> ws{pyr.width}, hs{pyr.height};
  for (int l = 1; l < 4; ++l) {
    ws[l] = (ws[l - 1] + 1) / 2;
    hs[l] = (hs[l - 1] + 1) / 2;
  }
  paste(work, pyr.ll, 0, 0);
  for (int level = 2; level >= 0; --level) {
    const int w = ws[level], h = hs[level];
    const int lw = ws[level + 1], lh = hs[level + 1];
    paste(work, pyr.levels[level].lh, 0, lh);
    paste(work, pyr.levels[level].hl, lw, 0);
    paste(work, pyr.levels[level].hh, lw, lh);
    inverse_2d(work, w, h);
  }
  return work;
}

double subband_log_energy(const PlaneF& band) {
  if (band.empty()) return 0.0;
  double acc = 0.0;
  for (double c : band.samples()) acc += c * c;
  return std::log10(1.0 + acc / static_cast<double>(band.size()));
}

double level_log_energy(const DwtLevel& level, double hh_weight) {
  const double lh = subband_log_energy(level.lh);
  const double hl = subband_log_energy(level.hl);
  const double hh = subband_log_energy(level.hh);
  return (0.5 * (lh + hl) + hh_weight * hh) / (1.0 + hh_weight);
}

LogEnergy log_energy(const DwtPyramid& pyr, double hh_weight) {
  if (!(hh_weight >= 0.0)) throw InvalidArgument("le.hh_weight must be nonnegative");
  return {level_log_energy(pyr.levels[1], hh_weight), level_log_energy(pyr.levels[2], hh_weight)};
}

}  // namespace biqme::local
