#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "biqme/error.hpp"
#include "biqme/local_features.hpp"
#include "oracles.hpp"
#include "synth.hpp"

using namespace biqme;

namespace {

// Published CDF 9/7 analysis taps (JPEG2000 normalization), centre first.
constexpr double kLowTaps[] = {0.602949018236360, 0.266864118442875, -0.078223266528990, -0.016864118442875,
                               0.026748757410810};
constexpr double kHighTaps[] = {1.115087052457000, -0.591271763114250, -0.057543526228500, 0.091271763114250};

// Direct FIR filtering with whole-sample symmetric extension.
std::vector<double> fir_dwt(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  auto at = [&](int i) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i;
      if (i >= n) i = 2 * (n - 1) - i;
    }
    return x[i];
  };
  const int nlow = (n + 1) / 2;
  std::vector<double> out(n);
  for (int k = 0; k < nlow; ++k) {
    double acc = kLowTaps[0] * at(2 * k);
    for (int t = 1; t < 5; ++t) acc += kLowTaps[t] * (at(2 * k - t) + at(2 * k + t));
    out[k] = acc;
  }
  for (int k = 0; k < n / 2; ++k) {
    const int c = 2 * k + 1;
    double acc = kHighTaps[0] * at(c);
    for (int t = 1; t < 4; ++t) acc += kHighTaps[t] * (at(c - t) + at(c + t));
    out[nlow + k] = acc;
  }
  return out;
}

// Separable 2-D single level built from the FIR oracle: rows then columns.
PlaneF fir_level(const PlaneF& p) {
  PlaneF tmp = p;
  for (int y = 0; y < p.height(); ++y) {
    std::vector<double> row(p.width());
    for (int x = 0; x < p.width(); ++x) row[x] = tmp(x, y);
    row = fir_dwt(row);
    for (int x = 0; x < p.width(); ++x) tmp(x, y) = row[x];
  }
  for (int x = 0; x < p.width(); ++x) {
    std::vector<double> col(p.height());
    for (int y = 0; y < p.height(); ++y) col[y] = tmp(x, y);
    col = fir_dwt(col);
    for (int y = 0; y < p.height(); ++y) tmp(x, y) = col[y];
  }
  return tmp;
}

double direct_log_energy(const PlaneF& b) {
  long double acc = 0;
  for (double c : b.samples()) acc += static_cast<long double>(c) * c;
  return std::log10(1.0 + static_cast<double>(acc / b.size()));
}

PlaneF blur(const PlaneF& p, double sigma) {
  if (sigma == 0.0) return p;
  const auto g = gaussian_kernel_1d(sigma);
  return convolve_separable(p, g, g);
}

}  // namespace

TEST_CASE("contrast energy of a constant image is zero") {
  const auto ce = local::contrast_energy(biqme::testing::constant_image(40, 40, 90));
  CHECK(ce.gr == 0.0);
  CHECK(ce.yb == 0.0);
  CHECK(ce.rg == 0.0);
}

TEST_CASE("contrast energy bound and gray input") {
  const local::CeParams p;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RasterImage img = biqme::testing::noise_image(40, 36, seed);
    const auto ce = local::contrast_energy(img, p);
    PlaneF g = to_gray(img);
    for (double& v : g.samples()) v /= 255.0;
    const auto d2 = local::gaussian_second_derivative_1d(1.0);
    const auto gk = gaussian_kernel_1d(1.0);
    const PlaneF fh = convolve_separable(g, d2, gk), fv = convolve_separable(g, gk, d2);
    double alpha = 0.0;
    for (std::size_t i = 0; i < fh.size(); ++i) alpha = std::max(alpha, std::hypot(fh.samples()[i], fv.samples()[i]));
    CHECK(ce.gr >= 0.0);
    CHECK(ce.gr <= alpha / (1.0 + p.theta) + 1e-12);
  }
  const auto gray = local::contrast_energy(biqme::testing::noise_image(40, 40, 9, 1));
  CHECK(gray.yb == 0.0);
  CHECK(gray.rg == 0.0);
}

TEST_CASE("contrast energy matches a direct evaluation") {
  const RasterImage img = biqme::testing::checkerboard(40, 40, 2, 0, 255, 1);
  local::CeParams p;
  PlaneF g = to_gray(img);
  for (double& v : g.samples()) v /= 255.0;
  // Sampled second derivative of a Gaussian, made zero-sum, oracle-built by hand.
  std::vector<double> gk(7), d2(7);
  double gs = 0.0;
  for (int i = -3; i <= 3; ++i) gs += gk[i + 3] = std::exp(-i * i / 2.0);
  for (double& v : gk) v /= gs;
  double m = 0.0;
  for (int i = -3; i <= 3; ++i) m += d2[i + 3] = (i * i - 1.0) * gk[i + 3];
  for (double& v : d2) v -= m / 7.0;
  auto ours = local::gaussian_second_derivative_1d(1.0);
  REQUIRE(ours.size() == 7);
  CHECK(std::accumulate(ours.begin(), ours.end(), 0.0) == doctest::Approx(0.0).epsilon(1e-15));

  PlaneF kh(7, 7), kv(7, 7);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 7; ++x) {
      kh(x, y) = ours[x] * gk[y];
      kv(x, y) = gk[x] * ours[y];
    }
  const PlaneF fh = biqme::testing::brute_convolve(g, kh), fv = biqme::testing::brute_convolve(g, kv);
  std::vector<double> y(fh.size());
  double alpha = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) alpha = std::max(alpha, y[i] = std::hypot(fh.samples()[i], fv.samples()[i]));
  double acc = 0.0;
  for (double v : y) acc += alpha * v / (v + alpha * p.theta);
  const double expect = std::max(acc / y.size() - p.phi_gr, 0.0);
  CHECK(expect > 0.0);
  CHECK(local::contrast_energy(img, p).gr == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("high-contrast checkerboard beats its half-contrast blend") {
  const RasterImage hi = biqme::testing::checkerboard(64, 64, 2, 0, 255);
  RasterImage half = hi;
  for (auto& v : half.data) v = static_cast<std::uint8_t>(std::lround(0.5 * v + 0.5 * 127.5));
  CHECK(local::contrast_energy(hi).gr > local::contrast_energy(half).gr);
}

TEST_CASE("swapping red and green leaves CE_rg unchanged") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const RasterImage img = biqme::testing::natural_image(48, 48, seed);
    RasterImage sw = img;
    for (std::size_t i = 0; i < img.pixel_count(); ++i) std::swap(sw.data[3 * i], sw.data[3 * i + 1]);
    local::CeParams p;
    p.phi_rg = 1e-6;
    CHECK(local::contrast_energy(sw, p).rg == doctest::Approx(local::contrast_energy(img, p).rg).epsilon(1e-12));
  }
}

TEST_CASE("1-D 9/7 lifting equals the published FIR filters") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-100, 100);
  for (int n : {8, 9, 16, 17, 33}) {
    std::vector<double> x(n);
    for (double& v : x) v = d(rng);
    std::vector<double> y = x;
    local::dwt97_forward_1d(y);
    const auto ref = fir_dwt(x);
    for (int i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-9));
    local::dwt97_inverse_1d(y);
    for (int i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-9));
  }
}

TEST_CASE("constant plane has zero detail subbands") {
  const auto pyr = local::dwt97_3level(PlaneF(48, 40, 77.0));
  for (const auto& lv : pyr.levels)
    for (const PlaneF* b : {&lv.lh, &lv.hl, &lv.hh})
      for (double v : b->samples()) CHECK(std::abs(v) < 1e-9);
  const auto le = local::log_energy(pyr);
  CHECK(le.le2 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(le.le3 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("subband sizes halve with ceiling") {
  const auto pyr = local::dwt97_3level(biqme::testing::random_plane(45, 37, 1));
  CHECK(pyr.levels[0].hh.width() == 22);
  CHECK(pyr.levels[0].hh.height() == 18);
  CHECK(pyr.levels[0].lh.width() == 23);
  CHECK(pyr.levels[0].lh.height() == 18);
  CHECK(pyr.levels[0].hl.width() == 22);
  CHECK(pyr.levels[0].hl.height() == 19);
  CHECK(pyr.ll.width() == 6);
  CHECK(pyr.ll.height() == 5);
  CHECK_THROWS_AS(local::dwt97_3level(PlaneF(31, 40, 1.0)), InvalidArgument);
}

TEST_CASE("three-level reconstruction is exact") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PlaneF p = biqme::testing::random_plane(32 + 5 * static_cast<int>(seed), 40 + static_cast<int>(seed), seed);
    const PlaneF r = local::dwt97_reconstruct(local::dwt97_3level(p));
    double se = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) se += std::pow(p.samples()[i] - r.samples()[i], 2);
    CHECK(std::sqrt(se / p.size()) < 1e-6);
  }
}

TEST_CASE("impulse subbands match the FIR oracle") {
  PlaneF p(32, 32, 0.0);
  p(13, 18) = 255.0;
  const auto pyr = local::dwt97_3level(p);
  const PlaneF lv = fir_level(p);
  // Level 1 quadrants: LL | HL on top rows, LH | HH below.
  const int lw = 16, lh = 16;
  for (int y = 0; y < lh; ++y)
    for (int x = 0; x < lw; ++x) {
      CHECK(pyr.levels[0].hh(x, y) == doctest::Approx(lv(lw + x, lh + y)).epsilon(1e-9));
      CHECK(pyr.levels[0].hl(x, y) == doctest::Approx(lv(lw + x, y)).epsilon(1e-9));
      CHECK(pyr.levels[0].lh(x, y) == doctest::Approx(lv(x, lh + y)).epsilon(1e-9));
    }
  PlaneF ll(lw, lh);
  for (int y = 0; y < lh; ++y)
    for (int x = 0; x < lw; ++x) ll(x, y) = lv(x, y);
  const PlaneF lv2 = fir_level(ll);
  double e_oracle = 0.0, e_ours = 0.0;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      e_oracle += lv2(8 + x, 8 + y) * lv2(8 + x, 8 + y);
      e_ours += pyr.levels[1].hh(x, y) * pyr.levels[1].hh(x, y);
    }
  CHECK(e_ours == doctest::Approx(e_oracle).epsilon(1e-9));
}

TEST_CASE("log energy weighting") {
  local::DwtLevel lv{PlaneF(4, 4, 3.0), PlaneF(4, 4, 3.0), PlaneF(4, 4, 3.0)};
  const double v = std::log10(1.0 + 9.0);
  CHECK(local::level_log_energy(lv, 4.0) == doctest::Approx(v).epsilon(1e-14));
  local::DwtLevel mixed{PlaneF(4, 4, 1.0), PlaneF(4, 4, 2.0), PlaneF(4, 4, 3.0)};
  const double expect = (0.5 * (std::log10(2.0) + std::log10(5.0)) + 4.0 * std::log10(10.0)) / 5.0;
  CHECK(local::level_log_energy(mixed, 4.0) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("log energy matches direct summation on noise") {
  const PlaneF p = biqme::testing::random_plane(64, 48, 21);
  const auto pyr = local::dwt97_3level(p);
  const auto le = local::log_energy(pyr);
  for (int l : {1, 2}) {
    const auto& lv = pyr.levels[l];
    const double expect =
        (0.5 * (direct_log_energy(lv.lh) + direct_log_energy(lv.hl)) + 4.0 * direct_log_energy(lv.hh)) / 5.0;
    CHECK((l == 1 ? le.le2 : le.le3) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("log energy does not increase with blur") {
  const PlaneF p = to_gray(biqme::testing::natural_image(96, 96, 5));
  double prev2 = 1e9, prev3 = 1e9;
  for (double sigma : {0.0, 1.0, 2.0, 4.0}) {
    const auto le = local::log_energy(local::dwt97_3level(blur(p, sigma)));
    CHECK(le.le2 <= prev2 + 1e-12);
    CHECK(le.le3 <= prev3 + 1e-12);
    prev2 = le.le2;
    prev3 = le.le3;
  }
}

TEST_CASE("local features are finite on random input") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RasterImage img = biqme::testing::noise_image(32 + static_cast<int>(seed), 33, seed);
    const auto ce = local::contrast_energy(img);
    const auto le = local::log_energy(local::dwt97_3level(to_gray(img)));
    CHECK(std::isfinite(ce.gr));
    CHECK(std::isfinite(ce.yb));
    CHECK(std::isfinite(ce.rg));
    CHECK(std::isfinite(le.le2));
    CHECK(std::isfinite(le.le3));
  }
}
