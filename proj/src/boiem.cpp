#include "biqme/boiem.hpp"

#include <algorithm>
#include <cmath>

#include "biqme/error.hpp"
#include "biqme/parallel.hpp"

namespace biqme::boiem {

namespace {

std::uint8_t to_level(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

void require_normalized(const Histogram256& h, const char* what) {
  for (double b : h.bins)
    if (!(b >= 0.0) || !std::isfinite(b)) throw InvalidArgument(std::string(what) + " has a negative or non-finite bin");
  if (!h.is_normalized()) throw InvalidArgument(std::string(what) + " is not normalized");
}

}  // namespace

void Config::validate() const {
  if (lambda_b.size() != 3) throw InvalidArgument("boiem.lambda_b needs exactly 3 candidates");
  if (lambda_pairs.size() != 3) throw InvalidArgument("boiem.lambda_pairs needs exactly 3 candidates");
  for (double l : lambda_b)
    if (!(l > 0.0 && l <= 1.0)) throw InvalidArgument("boiem.lambda_b candidates must lie in (0,1]");
  for (auto [e, s] : lambda_pairs)
    if (!(e > 0.0 && s > 0.0 && std::isfinite(e) && std::isfinite(s)))
      throw InvalidArgument("boiem.lambda_pairs entries must be positive");
  if (!(rayleigh_scale > 0.0)) throw InvalidArgument("boiem.rayleigh_scale must be positive");
}

GrayLut GrayLut::identity() {
  GrayLut l;
  for (int z = 0; z < 256; ++z) l.map[z] = static_cast<std::uint8_t>(z);
  return l;
}

std::array<double, 256> agcwd_curve(const Histogram256& h, double lambda_b, bool* degenerate) {
  require_normalized(h, "AGCWD histogram");
  if (!(lambda_b > 0.0 && lambda_b <= 1.0)) throw InvalidArgument("lambda_b must lie in (0,1]");
  std::array<double, 256> t{};
  for (int z = 0; z < 256; ++z) t[z] = z;
  if (degenerate) *degenerate = false;

  int zmin = 0, zmax = 255;
  while (h.bins[zmin] <= 0.0) ++zmin;
  while (h.bins[zmax] <= 0.0) --zmax;
  if (zmin == zmax) {
    if (degenerate) *degenerate = true;
    return t;
  }

  double pmin = h.bins[zmin], pmax = h.bins[zmin];
  for (int z = zmin; z <= zmax; ++z) {
    pmin = std::min(pmin, h.bins[z]);
    pmax = std::max(pmax, h.bins[z]);
  }
  std::array<double, 256> w{};
  double wsum = 0.0;
  for (int z = zmin; z <= zmax; ++z) {
    w[z] = pmax > pmin ? pmax * std::pow((h.bins[z] - pmin) / (pmax - pmin), lambda_b) : h.bins[z];
    wsum += w[z];
  }
  double acc = 0.0;
  for (int z = 0; z < 256; ++z) {
    double cdf = 0.0;
    if (z >= zmax) {
      cdf = 1.0;
    } else if (z >= zmin) {
      acc += w[z];
      cdf = acc / wsum;
    }
    t[z] = 255.0 * std::pow(z / 255.0, 1.0 - cdf);
  }
  return t;
}

GrayLut agcwd_lut(const Histogram256& h, double lambda_b) {
  GrayLut lut;
  const auto t = agcwd_curve(h, lambda_b, &lut.degenerate);
  for (int z = 0; z < 256; ++z) lut.map[z] = to_level(t[z]);
  return lut;
}

Histogram256 rayleigh_histogram(double scale) {
  if (!(scale > 0.0)) throw InvalidArgument("Rayleigh scale must be positive");
  Histogram256 h;
  const double s2 = scale * scale;
  for (int z = 0; z < 256; ++z) h.bins[z] = z / s2 * std::exp(-z * static_cast<double>(z) / (2.0 * s2));
  return h.normalized();
}

Histogram256 rice_target_histogram(const Histogram256& h_e, double lambda_e, double lambda_s, const Config& cfg) {
  require_normalized(h_e, "RICE input histogram");
  if (!(lambda_e >= 0.0 && lambda_s >= 0.0)) throw InvalidArgument("RICE weights must be nonnegative");
  const Histogram256 hs = rayleigh_histogram(cfg.rayleigh_scale);
  const double denom = 1.0 + lambda_e + lambda_s;
  Histogram256 out;
  for (int z = 0; z < 256; ++z) out.bins[z] = (1.0 / 256.0 + lambda_e * h_e.bins[z] + lambda_s * hs.bins[z]) / denom;
  return out;
}

GrayLut histogram_match(const Histogram256& source, const Histogram256& target) {
  require_normalized(target, "target histogram");
  const double stotal = source.total();
  if (!(stotal > 0.0)) throw InvalidArgument("source histogram is empty");
  std::array<double, 256> ct{};
  double acc = 0.0;
  for (int y = 0; y < 256; ++y) ct[y] = acc += target.bins[y];

  GrayLut lut;
  double cs = 0.0;
  int y = 0;
  for (int z = 0; z < 256; ++z) {
    cs += source.bins[z];
    const double want = cs / stotal - 1e-12;
    // Source CDF is nondecreasing, so the search resumes from the last y.
    while (y < 255 && ct[y] < want) ++y;
    lut.map[z] = static_cast<std::uint8_t>(y);
  }
  return lut;
}

GrayLut histogram_match(const PlaneF& gray, const Histogram256& target) {
  return histogram_match(histogram(gray, false), target);
}

PlaneF value_channel(const RasterImage& img) {
  if (!img.is_color()) return to_gray(img);
  PlaneF v(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) v(x, y) = std::max({img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)});
  return v;
}

RasterImage apply_value_lut(const RasterImage& img, const GrayLut& lut) {
  RasterImage out = img;
  if (!img.is_color()) {
    for (auto& v : out.data) v = lut.map[v];
    return out;
  }
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const std::uint8_t* px = &img.data[3 * i];
    std::uint8_t* dst = &out.data[3 * i];
    const int v = std::max({px[0], px[1], px[2]});
    const int nv = lut.map[v];
    if (v == 0) {
      dst[0] = dst[1] = dst[2] = static_cast<std::uint8_t>(nv);
      continue;
    }
    const double gain = static_cast<double>(nv) / v;
    for (int c = 0; c < 3; ++c) dst[c] = to_level(px[c] * gain);
  }
  return out;
}

Result enhance(const RasterImage& img, const Config& cfg, const Scorer& score, int jobs) {
  cfg.validate();
  Result res;

  const Histogram256 h0 = histogram(value_channel(img), true);
  std::array<RasterImage, 3> stage1;
  for (int k = 0; k < 3; ++k) {
    const GrayLut lut = agcwd_lut(h0, cfg.lambda_b[k]);
    res.agcwd_degenerate = lut.degenerate;
    stage1[k] = apply_value_lut(img, lut);
  }
  parallel_for(3, jobs, [&](std::size_t k) { res.scores[k] = score(stage1[k]); });
  int b = 0;
  for (int k = 1; k < 3; ++k)
    if (res.scores[k] > res.scores[b]) b = k;
  res.lambda_b = cfg.lambda_b[b];
  const RasterImage& base = stage1[b];

  const Histogram256 hv = histogram(value_channel(base), false);
  const Histogram256 he = hv.normalized();
  std::array<RasterImage, 3> stage2;
  for (int k = 0; k < 3; ++k) {
    const auto [le, ls] = cfg.lambda_pairs[k];
    stage2[k] = apply_value_lut(base, histogram_match(hv, rice_target_histogram(he, le, ls, cfg)));
  }
  parallel_for(3, jobs, [&](std::size_t k) { res.scores[3 + k] = score(stage2[k]); });
  int e = 0;
  for (int k = 1; k < 3; ++k)
    if (res.scores[3 + k] > res.scores[3 + e]) e = k;
  res.lambda_e = cfg.lambda_pairs[e].first;
  res.lambda_s = cfg.lambda_pairs[e].second;
  res.image = std::move(stage2[e]);
  return res;
}

double biqme_score(const RasterImage& img, const svr::SvrModel& model, const FeatureConfig& fcfg) {
  const FeatureVector fv = extract_features(img, fcfg);
  return model.predict(fv.values);
}

Result enhance(const RasterImage& img, const Config& cfg, const svr::SvrModel& model, const FeatureConfig& fcfg,
               int jobs) {
  return enhance(img, cfg, [&](const RasterImage& im) { return biqme_score(im, model, fcfg); }, jobs);
}

}  // namespace biqme::boiem
