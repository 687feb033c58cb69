#include "biqme/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include "biqme/csv.hpp"
#include "biqme/error.hpp"

namespace biqme {

const std::array<std::string, kFeatureCount>& feature_column_names() {
  static const std::array<std::string, kFeatureCount> names = [] {
    std::array<std::string, kFeatureCount> n;
    for (std::size_t i = 0; i < kFeatureCount; ++i)
      n[i] = (i + 1 < 10 ? "f0" : "f") + std::to_string(i + 1);
    return n;
  }();
  return names;
}

std::string_view feature_symbol(std::size_t index) {
  static constexpr std::array<std::string_view, kFeatureCount> symbols{
      "E_pc", "CE_gr", "CE_yb", "CE_rg", "LE_2", "LE_3", "E_m1", "E_m2", "E_m3",
      "E_m4", "E_m5", "E_m6", "S", "C", "nu", "sigma2", "S_d"};
  return index < kFeatureCount ? symbols[index] : std::string_view{};
}

bool FeatureVector::all_finite() const {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

void FeatureConfig::validate() const {
  pc.validate();
  ce.validate();
  if (!(le_hh_weight >= 0.0)) throw InvalidArgument("le.hh_weight must be nonnegative");
  brightness.validate();
  mscn.validate();
}

FeatureVector extract_features(const RasterImage& img, const FeatureConfig& cfg, unsigned families) {
  require_feature_size(img);
  cfg.validate();

  FeatureVector fv;
  fv.values.fill(std::numeric_limits<double>::quiet_NaN());
  const PlaneF gray = to_gray(img);
  const bool color = img.is_color();

  if (families & kFamilyContrast) {
    const auto pcm = pc::pc_map(gray, cfg.pc);
    fv[Feature::kPcEntropy] = pc::pc_entropy(gray, pcm, cfg.pc.top_fraction);
    const auto ce = local::contrast_energy(img, cfg.ce);
    fv[Feature::kContrastGray] = ce.gr;
    fv[Feature::kContrastYb] = ce.yb;
    fv[Feature::kContrastRg] = ce.rg;
  }

  if (families & kFamilySharpness) {
    const auto le = local::log_energy(local::dwt97_3level(gray), cfg.le_hh_weight);
    fv[Feature::kLogEnergy2] = le.le2;
    fv[Feature::kLogEnergy3] = le.le3;
  }

  if (families & kFamilyBrightness) {
    const auto e = global::brightness_entropies(gray, cfg.brightness);
    for (std::size_t k = 0; k < e.size(); ++k)
      fv[static_cast<std::size_t>(Feature::kBrightness1) + k] = e[k];
  }

  if (families & kFamilyColorfulness) {
    if (color) {
      const auto c = global::colorfulness_pair(img);
      fv[Feature::kSaturation] = c.saturation;
      fv[Feature::kColorfulness] = c.hasler;
    } else {
      fv[Feature::kSaturation] = 0.0;
      fv[Feature::kColorfulness] = 0.0;
    }
  }

  if (families & kFamilyNaturalness) {
    const PlaneF coeffs = global::mscn(gray, cfg.mscn);
    const auto s = coeffs.samples();
    const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
    if (*mn == *mx) {
      // Flat images have no MSCN distribution to fit.
      fv[Feature::kGgdShape] = 2.0;
      fv[Feature::kGgdVariance] = 0.0;
      fv.ggd_degenerate = true;
    } else {
      const auto fit = global::ggd_fit(s);
      fv[Feature::kGgdShape] = fit.nu;
      fv[Feature::kGgdVariance] = fit.sigma2;
      fv.ggd_clamped = fit.clamped;
    }
    fv[Feature::kDarkChannel] = color ? global::dark_channel_mean(img) : gray.mean() / 255.0;
  }
  return fv;
}

std::string format_feature_value(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

void write_feature_header(std::ostream& os, bool with_label) {
  os << "image";
  for (const auto& name : feature_column_names()) os << ',' << name;
  if (with_label) os << ",label";
  os << '\n';
}

void write_feature_row(std::ostream& os, std::string_view image, const FeatureVector& fv) {
  os << csv::escape(image);
  for (double v : fv.values) os << ',' << format_feature_value(v);
  os << '\n';
}

}  // namespace biqme
