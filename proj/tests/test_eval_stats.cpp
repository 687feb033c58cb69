#include <doctest.h>

#include <cmath>
#include <random>

#include "biqme/error.hpp"
#include "biqme/eval_stats.hpp"

using namespace biqme;
using eval::ScorePairs;

namespace {

// O(n^2) tau-b by pair counting.
double brute_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  long long c = 0, d = 0, tx = 0, ty = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double a = x[i] - x[j], b = y[i] - y[j];
      if (a == 0 && b == 0) continue;
      if (a == 0) {
        ++tx;
      } else if (b == 0) {
        ++ty;
      } else if ((a > 0) == (b > 0)) {
        ++c;
      } else {
        ++d;
      }
    }
  return (c - d) / std::sqrt(static_cast<double>(c + d + tx) * static_cast<double>(c + d + ty));
}

// Ranks by counting strictly smaller and equal values.
std::vector<double> brute_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

double brute_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

ScorePairs random_pairs(std::size_t n, std::uint64_t seed, double noise = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> e(0, noise);
  ScorePairs p;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = u(rng);
    p.objective.push_back(q);
    p.mos.push_back(1 + 4 / (1 + std::exp(-6 * (q - 0.5))) + e(rng));
  }
  return p;
}

}  // namespace

TEST_CASE("score pairs are validated") {
  CHECK_THROWS_AS((ScorePairs{{1, 2, 3}, {1, 2, 3}}.validate()), InvalidArgument);
  CHECK_THROWS_AS((ScorePairs{{1, 2, 3, 4}, {1, 2, 3}}.validate()), DimensionMismatch);
  CHECK_THROWS_AS((ScorePairs{{1, 2, 3, NAN}, {1, 2, 3, 4}}.validate()), InvalidArgument);
  ScorePairs ok{{1, 2, 3, 4}, {1, 2, 3, 4}};
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.low_confidence());
  CHECK_FALSE(random_pairs(20, 1).low_confidence());
}

TEST_CASE("noiseless logistic data is fitted exactly") {
  const std::array<std::array<double, 5>, 3> truths{{{3.0, 8.0, 0.4, 0.5, 2.0},
                                                     {-2.0, 15.0, 0.6, 1.0, 0.0},
                                                     {50.0, 0.2, 3.0, -0.5, 10.0}}};
  for (const auto& tau : truths) {
    ScorePairs p;
    for (int i = 0; i < 60; ++i) {
      const double q = i / 59.0 * (tau[2] > 1 ? 6.0 : 1.0);
      p.objective.push_back(q);
      p.mos.push_back(eval::logistic5(tau, q));
    }
    const auto fit = eval::fit_logistic5(p);
    CHECK(fit.rmse <= 1e-6);
    double worst = 0;
    for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(fit(p.objective[i]) - p.mos[i]));
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("identity objective gives unit correlations") {
  ScorePairs p = random_pairs(40, 2);
  p.objective = p.mos;
  const auto r = eval::evaluate(p);
  CHECK(std::abs(r.plc.value - 1.0) <= 1e-9);
  CHECK(r.srocc.value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.krcc.value == doctest::Approx(1.0).epsilon(1e-15));
  for (double& v : p.objective) v = -v;
  CHECK(eval::srocc(p).value == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(eval::krcc(p).value == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("constant inputs are flagged") {
  ScorePairs p = random_pairs(30, 3);
  std::fill(p.mos.begin(), p.mos.end(), 3.0);
  const auto r = eval::evaluate(p);
  CHECK(r.plc.degenerate);
  CHECK(r.plc.value == 0.0);
  CHECK(r.srocc.degenerate);
  CHECK(r.krcc.degenerate);

  ScorePairs q = random_pairs(30, 3);
  std::fill(q.objective.begin(), q.objective.end(), 0.5);
  const auto f = eval::fit_logistic5(q);
  CHECK(f.linear_fallback);
  CHECK(f.tau[0] == 0.0);
  double mean = 0;
  for (double m : q.mos) mean += m / q.size();
  CHECK(f(0.5) == doctest::Approx(mean).epsilon(1e-12));
  CHECK(eval::srocc(q).degenerate);
}

TEST_CASE("tied data matches brute-force rank and pair counting") {
  const std::vector<double> obj{0.3, 0.1, 0.3, 0.7, 0.7, 0.7, 0.2, 0.9};
  const std::vector<double> mos{2.0, 1.0, 3.0, 3.0, 4.0, 3.0, 1.0, 5.0};
  const ScorePairs p{obj, mos};
  CHECK(eval::average_ranks(obj) == brute_ranks(obj));
  CHECK(std::abs(eval::srocc(p).value - brute_pearson(brute_ranks(obj), brute_ranks(mos))) <= 1e-12);
  CHECK(std::abs(eval::krcc(p).value - brute_tau_b(obj, mos)) <= 1e-12);
}

TEST_CASE("rank statistics on random tied data") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> level(0, 6);
  for (int trial = 0; trial < 30; ++trial) {
    ScorePairs p;
    const int n = 4 + trial * 3;
    for (int i = 0; i < n; ++i) {
      p.objective.push_back(level(rng));
      p.mos.push_back(level(rng) * 0.5);
    }
    const auto s = eval::srocc(p), k = eval::krcc(p);
    if (s.degenerate) continue;
    CHECK(std::abs(s.value - brute_pearson(brute_ranks(p.objective), brute_ranks(p.mos))) <= 1e-12);
    CHECK(std::abs(k.value - brute_tau_b(p.objective, p.mos)) <= 1e-12);
  }
}

TEST_CASE("rank statistics ignore increasing transforms") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ScorePairs p = random_pairs(50, seed);
    ScorePairs t = p;
    for (double& v : t.objective) v = std::exp(3 * v) + 7;
    CHECK(eval::srocc(t).value == doctest::Approx(eval::srocc(p).value).epsilon(1e-14));
    CHECK(eval::krcc(t).value == doctest::Approx(eval::krcc(p).value).epsilon(1e-14));
  }
}

TEST_CASE("fitted PLC is at least the raw Pearson magnitude") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    ScorePairs p = random_pairs(8 + 6 * seed, seed, 0.2 + 0.1 * static_cast<double>(seed % 5));
    if (seed % 3 == 0)
      for (double& v : p.objective) v = -v;
    const auto r = eval::evaluate(p);
    const double raw = std::abs(eval::pearson(p.objective, p.mos).value);
    CHECK(r.plc.value >= raw - 1e-9);
    for (double v : {r.plc.value, r.srocc.value, r.krcc.value}) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
    // The fit never loses to the best constant predictor.
    double mean = 0, sse = 0;
    for (double m : p.mos) mean += m / p.size();
    for (double m : p.mos) sse += (m - mean) * (m - mean);
    CHECK(r.fit.rmse <= std::sqrt(sse / p.size()) + 1e-12);
  }
}

TEST_CASE("fitting is deterministic for a seed") {
  const ScorePairs p = random_pairs(60, 8);
  const auto a = eval::fit_logistic5(p, {20, 5});
  const auto b = eval::fit_logistic5(p, {20, 5});
  CHECK(a.tau == b.tau);
  CHECK(a.rmse == b.rmse);
  CHECK(a.restarts == 20);
  CHECK(eval::pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}).value ==
        doctest::Approx(1.0).epsilon(1e-15));
}
