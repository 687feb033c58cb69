#pragma once

// Synthetic training corpus: global tone-curve variants of source images,
// labeled with the full-reference C-PCQI score against their source.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "biqme/cpcqi.hpp"
#include "biqme/features.hpp"
#include "biqme/image.hpp"

namespace biqme::gen {

enum class OpKind {
  kOriginal,  // the untouched source
  kGamma,
  kInverseGamma,
  kSCurve,
  kInverseS,
  kConvexArch,
  kConcaveArch,
  kMeanShift,
  kHistEq,
};

inline constexpr std::array<OpKind, 8> kEnhanceOps{OpKind::kGamma,      OpKind::kInverseGamma, OpKind::kSCurve,
                                                   OpKind::kInverseS,   OpKind::kConvexArch,   OpKind::kConcaveArch,
                                                   OpKind::kMeanShift,  OpKind::kHistEq};

std::string_view op_name(OpKind kind);

struct EnhanceOp {
  OpKind kind = OpKind::kOriginal;
  // gamma exponent, S-curve slope, arch curvature, shift in levels or
  // equalization strength, depending on kind
  double param = 0.0;
};

using Lut = std::array<std::uint8_t, 256>;

// Parameter ranges for the operator draws.
struct GenConfig {
  int per_op = 7;
  double gamma_min = 0.3, gamma_max = 2.5;
  double slope_min = 0.5, slope_max = 3.0;
  double arch_min = 0.2, arch_max = 1.0;  // concave arch uses the negated range
  double shift_max = 60.0;
  double he_strength_min = 0.3;  // draw 0 is always full equalization

  void validate() const;
};

// Tone curve of an operator. Equalization needs the image to build its CDF.
Lut make_lut(const EnhanceOp& op, const RasterImage& img);
Lut equalization_lut(const Histogram256& counts);
RasterImage apply_lut(const RasterImage& img, const Lut& lut);

struct Variant {
  RasterImage image;
  EnhanceOp op;
  int draw = 0;
};

// per_op draws for each of the eight operators, operator-major. The source
// itself is not included; label_and_emit adds it as the reference row.
std::vector<Variant> generate_variants(const RasterImage& src, const GenConfig& cfg, std::uint64_t seed);

// One row per variant plus a leading reference row (label 1).
struct LabeledRow {
  std::string name;
  EnhanceOp op;
  int draw = 0;
  FeatureVector features;
  double label = 0.0;
};

std::vector<LabeledRow> label_and_emit(const std::vector<Variant>& variants, const RasterImage& reference,
                                       std::string_view source_name, const FeatureConfig& fcfg = {},
                                       const cpcqi::Config& ccfg = {}, int jobs = 1);

// Content hash of the decoded pixels (FNV-1a, hex).
std::string source_hash(const RasterImage& img);

// Per-source seed derived from the run seed and the source index.
std::uint64_t source_seed(std::uint64_t seed, std::size_t source_index);

}  // namespace biqme::gen
