#pragma once

// The 17-dimension enhancement-aware feature vector and its CSV dump format.

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>

#include "biqme/global_features.hpp"
#include "biqme/image.hpp"
#include "biqme/local_features.hpp"
#include "biqme/phase_congruency.hpp"

namespace biqme {

inline constexpr std::size_t kFeatureCount = 17;

enum class Feature : std::size_t {
  kPcEntropy = 0,      // f01 E_pc
  kContrastGray,       // f02 CE_gr
  kContrastYb,         // f03 CE_yb
  kContrastRg,         // f04 CE_rg
  kLogEnergy2,         // f05 LE_2
  kLogEnergy3,         // f06 LE_3
  kBrightness1,        // f07..f12 E_m1..E_m6
  kBrightness2,
  kBrightness3,
  kBrightness4,
  kBrightness5,
  kBrightness6,
  kSaturation,         // f13 S
  kColorfulness,       // f14 C
  kGgdShape,           // f15 nu
  kGgdVariance,        // f16 sigma^2
  kDarkChannel,        // f17 S_d
};

// Column names f01..f17.
const std::array<std::string, kFeatureCount>& feature_column_names();
// Human-readable symbol for each feature (E_pc, CE_gr, ...).
std::string_view feature_symbol(std::size_t index);

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  bool ggd_degenerate = false;
  bool ggd_clamped = false;

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }

  bool all_finite() const;
};

// Feature families, one per perceptual factor; usable as a bit mask.
enum FeatureFamily : unsigned {
  kFamilyContrast = 1u << 0,     // E_pc, CE_*
  kFamilySharpness = 1u << 1,    // LE_2, LE_3
  kFamilyBrightness = 1u << 2,   // E_m1..E_m6
  kFamilyColorfulness = 1u << 3, // S, C
  kFamilyNaturalness = 1u << 4,  // nu, sigma^2, S_d
  kAllFamilies = 0x1fu,
};

struct FeatureConfig {
  pc::BankConfig pc;
  local::CeParams ce;
  double le_hh_weight = 4.0;
  global::BrightnessConfig brightness;
  global::MscnConfig mscn;

  void validate() const;
};

// Computes the requested families; features of skipped families are NaN.
// Gray images give CE_yb = CE_rg = S = C = 0 and S_d = mean/255.
FeatureVector extract_features(const RasterImage& img, const FeatureConfig& cfg = {},
                               unsigned families = kAllFamilies);

// CSV helpers: values printed with 9 significant digits.
std::string format_feature_value(double v);
void write_feature_header(std::ostream& os, bool with_label = false);
void write_feature_row(std::ostream& os, std::string_view image, const FeatureVector& fv);

}  // namespace biqme
