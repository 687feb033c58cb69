#include <doctest.h>

#include <map>
#include <set>

#include "biqme/error.hpp"
#include "biqme/trainset.hpp"
#include "synth.hpp"

using namespace biqme;
using gen::EnhanceOp;
using gen::OpKind;

namespace {

bool monotone(const gen::Lut& lut, bool increasing = true) {
  for (int z = 1; z < 256; ++z)
    if (increasing ? lut[z] < lut[z - 1] : lut[z] > lut[z - 1]) return false;
  return true;
}

}  // namespace

TEST_CASE("unit exponent gamma is the identity") {
  const RasterImage img = biqme::testing::natural_image(40, 40, 1);
  for (OpKind k : {OpKind::kGamma, OpKind::kInverseGamma}) {
    const auto lut = gen::make_lut({k, 1.0}, img);
    for (int z = 0; z < 256; ++z) CHECK(lut[z] == z);
    CHECK(gen::apply_lut(img, lut) == img);
  }
  const auto zero_arch = gen::make_lut({OpKind::kConvexArch, 0.0}, img);
  for (int z = 0; z < 256; ++z) CHECK(zero_arch[z] == z);
}

TEST_CASE("mean shift on a constant image") {
  const RasterImage img = biqme::testing::constant_image(32, 32, 128);
  const RasterImage up = gen::apply_lut(img, gen::make_lut({OpKind::kMeanShift, 60.0}, img));
  for (auto v : up.data) CHECK(v == 188);
  const RasterImage down = gen::apply_lut(img, gen::make_lut({OpKind::kMeanShift, -60.0}, img));
  for (auto v : down.data) CHECK(v == 68);
  const auto lut = gen::make_lut({OpKind::kMeanShift, 60.0}, img);
  CHECK(lut[255] == 255);
}

TEST_CASE("equalizing a uniform histogram is the identity") {
  RasterImage img(256, 4, 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 256; ++x) img.at(x, y) = static_cast<std::uint8_t>(x);
  const auto lut = gen::make_lut({OpKind::kHistEq, 1.0}, img);
  for (int z = 0; z < 256; ++z) CHECK(std::abs(int{lut[z]} - z) <= 1);
  Histogram256 empty;
  const auto id = gen::equalization_lut(empty);
  for (int z = 0; z < 256; ++z) CHECK(id[z] == z);
}

TEST_CASE("equalization spreads a narrow histogram") {
  const RasterImage img = biqme::testing::compress_range(biqme::testing::natural_image(48, 48, 3), 100, 140);
  const auto lut = gen::make_lut({OpKind::kHistEq, 1.0}, img);
  const RasterImage out = gen::apply_lut(img, lut);
  const auto [lo, hi] = std::minmax_element(out.data.begin(), out.data.end());
  CHECK(int{*hi} - int{*lo} > 200);
  CHECK(monotone(lut));
}

TEST_CASE("operator curves keep their documented shape") {
  const RasterImage img = biqme::testing::natural_image(32, 32, 2);
  for (double g : {0.3, 0.7, 1.6, 2.5}) {
    const auto a = gen::make_lut({OpKind::kGamma, g}, img);
    const auto b = gen::make_lut({OpKind::kInverseGamma, g}, img);
    CHECK(monotone(a));
    CHECK(monotone(b));
    CHECK(a[0] == 0);
    CHECK(a[255] == 255);
    CHECK(b[0] == 0);
    CHECK(b[255] == 255);
    CHECK((g < 1 ? a[128] > 128 : a[128] < 128));
  }
  for (double s : {0.5, 1.5, 3.0}) {
    const auto sc = gen::make_lut({OpKind::kSCurve, s}, img);
    const auto is = gen::make_lut({OpKind::kInverseS, s}, img);
    CHECK(monotone(sc));
    CHECK(monotone(is));
    CHECK(sc[64] < 64);
    CHECK(sc[192] > 192);
    CHECK(is[64] > 64);
    CHECK(is[192] < 192);
  }
  const auto vex = gen::make_lut({OpKind::kConvexArch, 0.8}, img);
  const auto cave = gen::make_lut({OpKind::kConcaveArch, -0.8}, img);
  CHECK(vex[128] > 128);
  CHECK(cave[128] < 128);
  CHECK(monotone(vex));
  CHECK(monotone(cave));
}

TEST_CASE("variant draws are stratified, ordered and seeded") {
  const RasterImage src = biqme::testing::natural_image(40, 36, 4);
  const gen::GenConfig cfg;
  const auto v = gen::generate_variants(src, cfg, 99);
  REQUIRE(v.size() == 8u * cfg.per_op);
  std::map<OpKind, std::vector<double>> params;
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(v[i].op.kind == gen::kEnhanceOps[i / cfg.per_op]);
    CHECK(v[i].draw == static_cast<int>(i % cfg.per_op));
    CHECK(v[i].image.width == src.width);
    params[v[i].op.kind].push_back(v[i].op.param);
  }
  for (double g : params[OpKind::kGamma]) {
    CHECK(g >= cfg.gamma_min);
    CHECK(g <= cfg.gamma_max);
  }
  for (double s : params[OpKind::kMeanShift]) CHECK(std::abs(s) <= cfg.shift_max);
  for (double s : params[OpKind::kSCurve]) {
    CHECK(s >= cfg.slope_min);
    CHECK(s <= cfg.slope_max);
  }
  for (double a : params[OpKind::kConcaveArch]) CHECK(a <= -cfg.arch_min);
  CHECK(params[OpKind::kHistEq][0] == 1.0);
  // One draw per stratum: strictly increasing parameters.
  for (OpKind k : {OpKind::kGamma, OpKind::kSCurve, OpKind::kMeanShift, OpKind::kConvexArch})
    for (std::size_t d = 1; d < params[k].size(); ++d) CHECK(params[k][d] > params[k][d - 1]);

  const auto again = gen::generate_variants(src, cfg, 99);
  const auto other = gen::generate_variants(src, cfg, 100);
  bool differs = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(again[i].op.param == v[i].op.param);
    CHECK(again[i].image == v[i].image);
    differs |= other[i].op.param != v[i].op.param;
  }
  CHECK(differs);

  gen::GenConfig bad;
  bad.per_op = 0;
  CHECK_THROWS_AS(gen::generate_variants(src, bad, 1), InvalidArgument);
}

TEST_CASE("labeling adds the reference row") {
  const RasterImage src = biqme::testing::natural_image(48, 40, 5);
  gen::GenConfig cfg;
  cfg.per_op = 2;
  auto variants = gen::generate_variants(src, cfg, 3);
  variants.push_back({gen::apply_lut(src, gen::make_lut({OpKind::kGamma, 1.0}, src)), {OpKind::kGamma, 1.0}, 9});
  const auto rows = gen::label_and_emit(variants, src, "img.png", {}, {}, 2);
  REQUIRE(rows.size() == variants.size() + 1);
  CHECK(rows[0].label == 1.0);
  CHECK(rows[0].name == "img.png#reference");
  CHECK(rows[0].op.kind == OpKind::kOriginal);
  CHECK(rows[1].name == "img.png#gamma_0");
  CHECK(std::abs(rows.back().label - 1.0) <= 1e-9);
  std::set<std::string> names;
  for (const auto& r : rows) {
    CHECK(r.features.all_finite());
    CHECK(r.label <= 1.0);
    names.insert(r.name);
  }
  CHECK(names.size() == rows.size());

  const auto serial = gen::label_and_emit(variants, src, "img.png", {}, {}, 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(serial[i].label == rows[i].label);
    CHECK(serial[i].features.values == rows[i].features.values);
  }

  const RasterImage small = biqme::testing::natural_image(40, 40, 5);
  CHECK_THROWS_AS(gen::label_and_emit(variants, small, "x"), DimensionMismatch);
}

TEST_CASE("source hashes and seeds") {
  const RasterImage a = biqme::testing::natural_image(32, 32, 6);
  RasterImage b = a;
  CHECK(gen::source_hash(a) == gen::source_hash(b));
  CHECK(gen::source_hash(a).size() == 16);
  b.data[17] ^= 1;
  CHECK(gen::source_hash(a) != gen::source_hash(b));
  CHECK(gen::source_seed(1, 0) == gen::source_seed(1, 0));
  CHECK(gen::source_seed(1, 0) != gen::source_seed(1, 1));
  CHECK(gen::source_seed(1, 0) != gen::source_seed(2, 0));
}
