#include "biqme/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "biqme/error.hpp"

namespace biqme {

namespace {

void check_dims(int w, int h, int c) {
  if (w <= 0 || h <= 0) throw InvalidArgument("image dimensions must be positive");
  if (c != 1 && c != 3) throw InvalidArgument("image must have 1 or 3 channels");
}

void require_color(const RasterImage& img, const char* op) {
  if (img.channels != 3) throw InvalidArgument(std::string(op) + " needs a 3-channel image");
}

}  // namespace

RasterImage::RasterImage(int w, int h, int c) : width(w), height(h), channels(c) {
  check_dims(w, h, c);
  data.assign(static_cast<std::size_t>(w) * h * c, 0);
}

RasterImage::RasterImage(int w, int h, int c, std::vector<std::uint8_t> pixels)
    : width(w), height(h), channels(c), data(std::move(pixels)) {
  check_dims(w, h, c);
  if (data.size() != static_cast<std::size_t>(w) * h * c)
    throw InvalidArgument("pixel buffer length does not match width*height*channels");
}

void require_feature_size(const RasterImage& img) {
  check_dims(img.width, img.height, img.channels);
  if (img.width < kMinFeatureSize || img.height < kMinFeatureSize)
    throw InvalidArgument("image is " + std::to_string(img.width) + "x" +
                          std::to_string(img.height) + ", features need at least " +
                          std::to_string(kMinFeatureSize) + "x" + std::to_string(kMinFeatureSize));
}

PlaneF::PlaneF(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw InvalidArgument("plane dimensions must be nonnegative");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

PlaneF::PlaneF(int width, int height, std::vector<double> samples)
    : width_(width), height_(height), data_(std::move(samples)) {
  if (width < 0 || height < 0) throw InvalidArgument("plane dimensions must be nonnegative");
  if (data_.size() != static_cast<std::size_t>(width) * height)
    throw InvalidArgument("plane sample count does not match width*height");
}

double PlaneF::mean() const {
  if (data_.empty()) return 0.0;
  return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}

double PlaneF::min() const { return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end()); }
double PlaneF::max() const { return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end()); }

double Histogram256::total() const { return std::accumulate(bins.begin(), bins.end(), 0.0); }

bool Histogram256::is_normalized(double tol) const {
  for (double b : bins)
    if (b < 0.0 || !std::isfinite(b)) return false;
  return std::abs(total() - 1.0) <= tol;
}

Histogram256 Histogram256::normalized() const {
  const double t = total();
  if (!(t > 0.0)) throw InvalidArgument("cannot normalize an empty histogram");
  Histogram256 out;
  for (std::size_t i = 0; i < bins.size(); ++i) out.bins[i] = bins[i] / t;
  return out;
}

PlaneF to_gray(const RasterImage& img) {
  PlaneF out(img.width, img.height);
  auto dst = out.samples();
  if (img.channels == 1) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = img.data[i];
    return out;
  }
  require_color(img, "to_gray");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const std::uint8_t* px = &img.data[3 * i];
    dst[i] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
  }
  return out;
}

std::pair<PlaneF, PlaneF> opponent_channels(const RasterImage& img) {
  require_color(img, "opponent_channels");
  PlaneF yb(img.width, img.height), rg(img.width, img.height);
  auto ybs = yb.samples();
  auto rgs = rg.samples();
  for (std::size_t i = 0; i < ybs.size(); ++i) {
    const double r = img.data[3 * i], g = img.data[3 * i + 1], b = img.data[3 * i + 2];
    ybs[i] = 0.5 * (r + g) - b;
    rgs[i] = r - g;
  }
  return {std::move(yb), std::move(rg)};
}

PlaneF saturation_plane(const RasterImage& img) {
  require_color(img, "saturation_plane");
  PlaneF out(img.width, img.height);
  auto dst = out.samples();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const std::uint8_t* px = &img.data[3 * i];
    const int mx = std::max({px[0], px[1], px[2]});
    const int mn = std::min({px[0], px[1], px[2]});
    dst[i] = mx == 0 ? 0.0 : static_cast<double>(mx - mn) / mx;
  }
  return out;
}

PlaneF channel_plane(const RasterImage& img, int channel) {
  if (channel < 0 || channel >= img.channels) throw InvalidArgument("channel index out of range");
  PlaneF out(img.width, img.height);
  auto dst = out.samples();
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = img.data[i * img.channels + channel];
  return out;
}

Histogram256 histogram(const PlaneF& p, bool normalized) {
  Histogram256 h;
  for (double v : p.samples()) {
    if (!std::isfinite(v) || v < -1e-6 || v > 255.0 + 1e-6)
      throw InvalidArgument("histogram sample out of [0,255]: " + std::to_string(v));
    const long bin = std::clamp(std::lround(v), 0L, 255L);
    h.bins[static_cast<std::size_t>(bin)] += 1.0;
  }
  if (normalized && !p.empty()) {
    const double n = static_cast<double>(p.size());
    for (double& b : h.bins) b /= n;
  }
  return h;
}

Histogram256 histogram(const RasterImage& img, int channel, bool normalized) {
  if (channel < 0 || channel >= img.channels) throw InvalidArgument("channel index out of range");
  Histogram256 h;
  const std::size_t n = img.pixel_count();
  for (std::size_t i = 0; i < n; ++i) h.bins[img.data[i * img.channels + channel]] += 1.0;
  if (normalized && n > 0)
    for (double& b : h.bins) b /= static_cast<double>(n);
  return h;
}

double entropy(const Histogram256& h) {
  if (!h.is_normalized()) throw InvalidArgument("entropy needs a normalized histogram");
  double e = 0.0;
  for (double p : h.bins)
    if (p > 0.0) e -= p * std::log2(p);
  return std::max(e, 0.0);
}

int mirror_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

PlaneF convolve_2d(const PlaneF& p, const PlaneF& kernel) {
  if (kernel.width() % 2 == 0 || kernel.height() % 2 == 0)
    throw InvalidArgument("convolution kernel dimensions must be odd");
  const int w = p.width(), h = p.height();
  const int rx = kernel.width() / 2, ry = kernel.height() / 2;
  PlaneF out(w, h);
  if (p.empty()) return out;

  std::vector<int> xs(static_cast<std::size_t>(w + 2 * rx));
  for (int i = 0; i < w + 2 * rx; ++i) xs[i] = mirror_index(i - rx, w);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int ky = -ry; ky <= ry; ++ky) {
        const int sy = mirror_index(y - ky, h);
        for (int kx = -rx; kx <= rx; ++kx)
          acc += kernel(kx + rx, ky + ry) * p(xs[x - kx + rx], sy);
      }
      out(x, y) = acc;
    }
  }
  return out;
}

PlaneF convolve_separable(const PlaneF& p, std::span<const double> row_kernel,
                          std::span<const double> col_kernel) {
  if (row_kernel.size() % 2 == 0 || col_kernel.size() % 2 == 0)
    throw InvalidArgument("convolution kernel dimensions must be odd");
  const int w = p.width(), h = p.height();
  const int rx = static_cast<int>(row_kernel.size() / 2);
  const int ry = static_cast<int>(col_kernel.size() / 2);
  PlaneF tmp(w, h), out(w, h);
  if (p.empty()) return out;

  std::vector<double> line(static_cast<std::size_t>(w + 2 * rx));
  for (int y = 0; y < h; ++y) {
    for (int i = 0; i < w + 2 * rx; ++i) line[i] = p(mirror_index(i - rx, w), y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      // out[x] = sum_k k[k] * in[x - (k - r)]
      for (int k = 0; k <= 2 * rx; ++k) acc += row_kernel[k] * line[x + 2 * rx - k];
      tmp(x, y) = acc;
    }
  }
  std::vector<double> col(static_cast<std::size_t>(h + 2 * ry));
  for (int x = 0; x < w; ++x) {
    for (int i = 0; i < h + 2 * ry; ++i) col[i] = tmp(x, mirror_index(i - ry, h));
    for (int y = 0; y < h; ++y) {
      double acc = 0.0;
      for (int k = 0; k <= 2 * ry; ++k) acc += col_kernel[k] * col[y + 2 * ry - k];
      out(x, y) = acc;
    }
  }
  return out;
}

std::vector<double> gaussian_kernel_1d(double sigma, int radius) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian sigma must be positive");
  if (radius < 0) radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace biqme
