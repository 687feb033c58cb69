#include "biqme/trainset.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "biqme/error.hpp"
#include "biqme/hash.hpp"
#include "biqme/parallel.hpp"

namespace biqme::gen {

namespace {

double logistic(double beta, double u) { return 1.0 / (1.0 + std::exp(-beta * (u - 0.5))); }

// Normalized float curve on [0,1] for every kind except equalization.
double curve(const EnhanceOp& op, double u) {
  switch (op.kind) {
    case OpKind::kOriginal:
      return u;
    case OpKind::kGamma:
      return std::pow(u, op.param);
    case OpKind::kInverseGamma:
      return 1.0 - std::pow(1.0 - u, op.param);
    case OpKind::kSCurve: {
      const double beta = 4.0 * op.param;
      const double l0 = logistic(beta, 0.0), l1 = logistic(beta, 1.0);
      return (logistic(beta, u) - l0) / (l1 - l0);
    }
    case OpKind::kInverseS: {
      const double beta = 4.0 * op.param;
      const double l0 = logistic(beta, 0.0), l1 = logistic(beta, 1.0);
      const double v = l0 + u * (l1 - l0);
      return std::clamp(0.5 + std::log(v / (1.0 - v)) / beta, 0.0, 1.0);
    }
    case OpKind::kConvexArch:
    case OpKind::kConcaveArch:
      return u + op.param * u * (1.0 - u);
    case OpKind::kMeanShift:
      return u + op.param / 255.0;
    case OpKind::kHistEq:
      break;
  }
  return u;
}

std::uint8_t to_level(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

}  // namespace

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kOriginal: return "original";
    case OpKind::kGamma: return "gamma";
    case OpKind::kInverseGamma: return "inverse_gamma";
    case OpKind::kSCurve: return "s_curve";
    case OpKind::kInverseS: return "inverse_s";
    case OpKind::kConvexArch: return "convex_arch";
    case OpKind::kConcaveArch: return "concave_arch";
    case OpKind::kMeanShift: return "mean_shift";
    case OpKind::kHistEq: return "hist_eq";
  }
  return "unknown";
}

void GenConfig::validate() const {
  if (per_op < 1) throw InvalidArgument("gen.per_op must be at least 1");
  if (!(gamma_min > 0.0 && gamma_min <= gamma_max)) throw InvalidArgument("gen gamma range invalid");
  if (!(slope_min > 0.0 && slope_min <= slope_max)) throw InvalidArgument("gen slope range invalid");
  if (!(arch_min >= 0.0 && arch_min <= arch_max && arch_max <= 1.0))
    throw InvalidArgument("gen arch range must lie in [0,1]");
  if (!(shift_max >= 0.0 && shift_max <= 255.0)) throw InvalidArgument("gen.shift_max must lie in [0,255]");
  if (!(he_strength_min >= 0.0 && he_strength_min <= 1.0))
    throw InvalidArgument("gen.he_strength_min must lie in [0,1]");
}

Lut equalization_lut(const Histogram256& counts) {
  const double total = counts.total();
  Lut lut{};
  if (!(total > 0.0)) {
    for (int z = 0; z < 256; ++z) lut[z] = static_cast<std::uint8_t>(z);
    return lut;
  }
  double cdf_min = 0.0;
  for (double b : counts.bins)
    if (b > 0.0) {
      cdf_min = b / total;
      break;
    }
  double acc = 0.0;
  for (int z = 0; z < 256; ++z) {
    acc += counts.bins[z];
    const double cdf = acc / total;
    lut[z] = cdf_min >= 1.0 ? static_cast<std::uint8_t>(z) : to_level((cdf - cdf_min) / (1.0 - cdf_min) * 255.0);
  }
  return lut;
}

Lut make_lut(const EnhanceOp& op, const RasterImage& img) {
  Lut lut{};
  if (op.kind == OpKind::kHistEq) {
    const Lut he = equalization_lut(histogram(to_gray(img), false));
    const double w = std::clamp(op.param, 0.0, 1.0);
    for (int z = 0; z < 256; ++z) lut[z] = to_level((1.0 - w) * z + w * he[z]);
    return lut;
  }
  for (int z = 0; z < 256; ++z) lut[z] = to_level(255.0 * curve(op, z / 255.0));
  return lut;
}

RasterImage apply_lut(const RasterImage& img, const Lut& lut) {
  RasterImage out = img;
  for (auto& v : out.data) v = lut[v];
  return out;
}

std::vector<Variant> generate_variants(const RasterImage& src, const GenConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Stratified draw k of n over [lo, hi].
  auto stratified = [&](int k, double lo, double hi) { return lo + (hi - lo) * (k + unit(rng)) / cfg.per_op; };

  std::vector<Variant> out;
  for (OpKind kind : kEnhanceOps) {
    for (int k = 0; k < cfg.per_op; ++k) {
      double param = 0.0;
      switch (kind) {
        case OpKind::kGamma:
        case OpKind::kInverseGamma:
          param = std::exp(stratified(k, std::log(cfg.gamma_min), std::log(cfg.gamma_max)));
          break;
        case OpKind::kSCurve:
        case OpKind::kInverseS:
          param = stratified(k, cfg.slope_min, cfg.slope_max);
          break;
        case OpKind::kConvexArch:
          param = stratified(k, cfg.arch_min, cfg.arch_max);
          break;
        case OpKind::kConcaveArch:
          param = -stratified(k, cfg.arch_min, cfg.arch_max);
          break;
        case OpKind::kMeanShift:
          param = stratified(k, -cfg.shift_max, cfg.shift_max);
          break;
        case OpKind::kHistEq:
          // Full equalization first, then partial blends.
          param = k == 0 ? 1.0
                         : cfg.he_strength_min + (1.0 - cfg.he_strength_min) * (k - 1 + unit(rng)) /
                                                     std::max(1, cfg.per_op - 1);
          break;
        case OpKind::kOriginal:
          break;
      }
      const EnhanceOp op{kind, param};
      out.push_back({apply_lut(src, make_lut(op, src)), op, k});
    }
  }
  return out;
}

std::vector<LabeledRow> label_and_emit(const std::vector<Variant>& variants, const RasterImage& reference,
                                       std::string_view source_name, const FeatureConfig& fcfg,
                                       const cpcqi::Config& ccfg, int jobs) {
  for (const auto& v : variants)
    if (v.image.width != reference.width || v.image.height != reference.height)
      throw DimensionMismatch("variant size differs from its reference");
  std::vector<LabeledRow> rows(variants.size() + 1);
  // Row 0 is the reference itself; the rest follow variant order.
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    LabeledRow& row = rows[i];
    const RasterImage& img = i == 0 ? reference : variants[i - 1].image;
    if (i == 0) {
      row.name = std::string(source_name) + "#reference";
    } else {
      const auto& v = variants[i - 1];
      row.op = v.op;
      row.draw = v.draw;
      row.name = std::string(source_name) + "#" + std::string(op_name(v.op.kind)) + "_" + std::to_string(v.draw);
    }
    row.features = extract_features(img, fcfg);
    row.label = cpcqi::cpcqi_score(reference, img, ccfg);
  });
  return rows;
}

std::string source_hash(const RasterImage& img) {
  Fnv1a h;
  h.update_value(img.width);
  h.update_value(img.height);
  h.update_value(img.channels);
  h.update(img.data);
  return h.hex();
}

std::uint64_t source_seed(std::uint64_t seed, std::size_t source_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(source_index)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace biqme::gen
