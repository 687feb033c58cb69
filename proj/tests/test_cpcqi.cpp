#include <doctest.h>

#include <cmath>
#include <random>

#include "biqme/cpcqi.hpp"
#include "biqme/error.hpp"
#include "synth.hpp"

using namespace biqme;

namespace {

RasterImage map_levels(const RasterImage& img, auto fn) {
  RasterImage out = img;
  for (auto& v : out.data) v = static_cast<std::uint8_t>(std::clamp<long>(std::lround(fn(v)), 0, 255));
  return out;
}

// Infinite periodic texture sampled from horizontal offset dx.
RasterImage periodic(int w, int h, int period, std::uint64_t seed, int dx = 0) {
  const RasterImage tile = biqme::testing::noise_image(period, period, seed);
  RasterImage out(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = tile.at((x + dx) % period, y % period, c);
  return out;
}

}  // namespace

TEST_CASE("identical images score exactly one") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RasterImage img = biqme::testing::natural_image(40, 36, seed, seed % 2 == 0);
    CHECK(cpcqi::cpcqi_score(img, img) == 1.0);
    const RasterImage copy = img;
    CHECK(cpcqi::cpcqi_score(img, copy) == 1.0);
  }
  const RasterImage flat = biqme::testing::constant_image(20, 20, 9);
  CHECK(cpcqi::cpcqi_score(flat, flat) == 1.0);
}

TEST_CASE("reference against its global mean scores below one half") {
  const RasterImage ref = biqme::testing::natural_image(96, 96, 11);
  const PlaneF g = to_gray(ref);
  const auto m = static_cast<std::uint8_t>(std::lround(g.mean()));
  const double s = cpcqi::cpcqi_score(ref, biqme::testing::constant_image(96, 96, m));
  CHECK(s < 0.5);
  CHECK(s > 0.0);
}

TEST_CASE("mild gamma beats heavy solarization") {
  const RasterImage ref = biqme::testing::natural_image(96, 80, 4);
  const RasterImage mild = map_levels(ref, [](double v) { return 255.0 * std::pow(v / 255.0, 0.85); });
  const RasterImage solar = map_levels(ref, [](double v) { return v > 96 ? 255.0 - v : v; });
  CHECK(cpcqi::cpcqi_score(ref, mild) > cpcqi::cpcqi_score(ref, solar));
}

TEST_CASE("saturation similarity examples") {
  CHECK(cpcqi::saturation_similarity(0.4, 0.4) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cpcqi::saturation_similarity(0.5, 0.0) == doctest::Approx(1e-3 / 0.251).epsilon(1e-12));
  CHECK(cpcqi::saturation_similarity(0.5, 0.0) == doctest::Approx(0.003984).epsilon(1e-3));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng);
    CHECK(cpcqi::saturation_similarity(a, b) == cpcqi::saturation_similarity(b, a));
    CHECK(cpcqi::saturation_similarity(a, b, 1e-3, 2.0) ==
          doctest::Approx(std::pow(cpcqi::saturation_similarity(a, b), 2.0)));
  }
}

TEST_CASE("similarity terms are bounded") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto a = cpcqi::patch_grid(biqme::testing::noise_image(30, 30, seed));
    const auto b = cpcqi::patch_grid(biqme::testing::natural_image(30, 30, seed + 100));
    REQUIRE(a.patches.size() == b.patches.size());
    CHECK(a.cols == 5);
    for (std::size_t i = 0; i < a.patches.size(); ++i) {
      const auto t = cpcqi::patch_similarity(a.patches[i], b.patches[i], cpcqi::Config{});
      for (double v : {t.mean_intensity, t.contrast_change, t.structure, t.saturation}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0 + 1e-12);
      }
      double n = 0.0;
      for (double v : a.patches[i].structure) n += v * v;
      CHECK((a.patches[i].strength == 0.0 ? n == 0.0 : std::abs(n - 1.0) < 1e-12));
    }
  }
}

TEST_CASE("dimension mismatch and undersized inputs are rejected") {
  const RasterImage a = biqme::testing::noise_image(20, 20, 1);
  const RasterImage b = biqme::testing::noise_image(20, 21, 1);
  CHECK_THROWS_AS(cpcqi::cpcqi_score(a, b), DimensionMismatch);
  const RasterImage tiny = biqme::testing::noise_image(10, 20, 1);
  const RasterImage tiny2 = biqme::testing::noise_image(10, 20, 2);
  CHECK_THROWS_AS(cpcqi::cpcqi_score(tiny, tiny2), InvalidArgument);
}

TEST_CASE("score is invariant to a joint shift by the stride on periodic content") {
  // 47 wide: ten patch columns, so the two grid phases are equally represented.
  const RasterImage ref = periodic(47, 47, 8, 3);
  auto distort = [](const RasterImage& img) { return map_levels(img, [](double v) { return 0.7 * v + 30; }); };
  const double base = cpcqi::cpcqi_score(ref, distort(ref));
  const RasterImage moved = periodic(47, 47, 8, 3, 4);
  CHECK(moved != ref);
  CHECK(cpcqi::cpcqi_score(moved, distort(moved)) == doctest::Approx(base).epsilon(1e-12));
}
