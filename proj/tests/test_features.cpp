#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "biqme/error.hpp"
#include "biqme/features.hpp"
#include "synth.hpp"

using namespace biqme;

namespace {

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0 || (std::isnan(a) && std::isnan(b)); }

void check_ranges(const FeatureVector& fv) {
  CHECK(fv.all_finite());
  for (std::size_t i : {0u, 6u, 7u, 8u, 9u, 10u, 11u}) {
    CHECK(fv[i] >= 0.0);
    CHECK(fv[i] <= 8.0);
  }
  CHECK(fv[Feature::kSaturation] >= 0.0);
  CHECK(fv[Feature::kSaturation] <= 1.0);
  CHECK(fv[Feature::kDarkChannel] >= 0.0);
  CHECK(fv[Feature::kDarkChannel] <= 1.0);
  CHECK(fv[Feature::kColorfulness] >= 0.0);
  CHECK(fv[Feature::kGgdShape] >= 0.2);
  CHECK(fv[Feature::kGgdShape] <= 10.0);
}

}  // namespace

TEST_CASE("column names and symbols") {
  const auto& names = feature_column_names();
  CHECK(names.front() == "f01");
  CHECK(names.back() == "f17");
  CHECK(feature_symbol(0) == "E_pc");
  CHECK(feature_symbol(16) == "S_d");
}

TEST_CASE("constant gray image composes the trivial cases") {
  for (int channels : {1, 3}) {
    const RasterImage img = biqme::testing::constant_image(48, 40, 102, channels);
    const FeatureVector fv = extract_features(img);
    for (std::size_t i = 0; i < 14; ++i) CHECK(fv[i] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fv.ggd_degenerate);
    CHECK(fv[Feature::kGgdShape] == 2.0);
    CHECK(fv[Feature::kGgdVariance] == 0.0);
    CHECK(fv[Feature::kDarkChannel] == doctest::Approx(102.0 / 255.0));
    CHECK(fv.all_finite());
  }
}

TEST_CASE("checkerboard vector equals the upstream modules") {
  const RasterImage img = biqme::testing::checkerboard(64, 64, 8, 30, 220);
  const FeatureConfig cfg;
  const FeatureVector fv = extract_features(img, cfg);
  const PlaneF gray = to_gray(img);

  CHECK(fv[Feature::kPcEntropy] == pc::pc_entropy(gray, pc::pc_map(gray, cfg.pc), cfg.pc.top_fraction));
  const auto ce = local::contrast_energy(img, cfg.ce);
  CHECK(fv[Feature::kContrastGray] == ce.gr);
  CHECK(fv[Feature::kContrastYb] == ce.yb);
  CHECK(fv[Feature::kContrastRg] == ce.rg);
  const auto le = local::log_energy(local::dwt97_3level(gray));
  CHECK(fv[Feature::kLogEnergy2] == le.le2);
  CHECK(fv[Feature::kLogEnergy3] == le.le3);
  const auto e = global::brightness_entropies(gray);
  for (std::size_t k = 0; k < 6; ++k) CHECK(fv[6 + k] == e[k]);
  const auto c = global::colorfulness_pair(img);
  CHECK(fv[Feature::kSaturation] == c.saturation);
  CHECK(fv[Feature::kColorfulness] == c.hasler);
  const PlaneF m = global::mscn(gray);
  const auto fit = global::ggd_fit(m.samples());
  CHECK(fv[Feature::kGgdShape] == fit.nu);
  CHECK(fv[Feature::kGgdVariance] == fit.sigma2);
  CHECK(fv[Feature::kDarkChannel] == global::dark_channel_mean(img));

  // Gray checkerboard: no color, two levels, dark channel at the mean.
  CHECK(fv[Feature::kSaturation] == 0.0);
  CHECK(fv[Feature::kDarkChannel] == doctest::Approx(125.0 / 255.0));
  CHECK(fv[6 + 3] == doctest::Approx(1.0));
}

TEST_CASE("feature vectors are finite and in range on random inputs") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const int w = 32 + static_cast<int>(seed * 3), h = 40 - static_cast<int>(seed % 5);
    const RasterImage img = seed % 3 == 0   ? biqme::testing::noise_image(w, h, seed, seed % 2 ? 1 : 3)
                            : seed % 3 == 1 ? biqme::testing::natural_image(w, h, seed)
                                            : biqme::testing::low_light(biqme::testing::natural_image(w, h, seed));
    check_ranges(extract_features(img));
  }
  check_ranges(extract_features(biqme::testing::step_edge(40, 40)));
  check_ranges(extract_features(biqme::testing::impulse(40, 40)));
}

TEST_CASE("extraction is bit-for-bit deterministic") {
  const RasterImage img = biqme::testing::natural_image(70, 50, 8);
  const FeatureVector a = extract_features(img), b = extract_features(img);
  for (std::size_t i = 0; i < kFeatureCount; ++i) CHECK(bit_equal(a[i], b[i]));
}

TEST_CASE("skipping a family leaves the others unchanged") {
  const RasterImage img = biqme::testing::natural_image(64, 48, 2);
  const FeatureVector all = extract_features(img);
  const unsigned families[] = {kFamilyContrast, kFamilySharpness, kFamilyBrightness, kFamilyColorfulness,
                               kFamilyNaturalness};
  const std::pair<std::size_t, std::size_t> spans[] = {{0, 4}, {4, 6}, {6, 12}, {12, 14}, {14, 17}};
  for (std::size_t f = 0; f < 5; ++f) {
    const FeatureVector part = extract_features(img, {}, kAllFamilies & ~families[f]);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const bool skipped = i >= spans[f].first && i < spans[f].second;
      if (skipped)
        CHECK(std::isnan(part[i]));
      else
        CHECK(bit_equal(part[i], all[i]));
    }
  }
}

TEST_CASE("undersized images are rejected") {
  CHECK_THROWS_AS(extract_features(biqme::testing::noise_image(31, 40, 1)), InvalidArgument);
}

TEST_CASE("CSV dump uses nine significant digits") {
  CHECK(format_feature_value(1.0 / 3.0) == "0.333333333");
  CHECK(format_feature_value(0.0) == "0");
  FeatureVector fv;
  for (std::size_t i = 0; i < kFeatureCount; ++i) fv[i] = static_cast<double>(i) + 0.5;
  std::ostringstream os;
  write_feature_header(os);
  write_feature_row(os, "a,b.png", fv);
  const std::string s = os.str();
  CHECK(s.rfind("image,f01,f02,", 0) == 0);
  CHECK(s.find(",f17\n") != std::string::npos);
  CHECK(s.find("\"a,b.png\",0.5,1.5,") != std::string::npos);
  CHECK(s.substr(s.size() - 6) == ",16.5\n");
}
