#include "biqme/eval_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "biqme/error.hpp"

namespace biqme::eval {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Solves the least-squares problem min ||A c - y|| for up to three columns
// through the normal equations; near-singular pivots zero their unknown.
template <std::size_t K>
std::array<double, K> least_squares(const std::vector<std::array<double, K>>& rows, std::span<const double> y) {
  std::array<std::array<long double, K + 1>, K> m{};
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = 0; j < K; ++j) m[i][j] += static_cast<long double>(rows[r][i]) * rows[r][j];
      m[i][K] += static_cast<long double>(rows[r][i]) * y[r];
    }
  long double scale = 0;
  for (std::size_t i = 0; i < K; ++i) scale = std::max(scale, std::fabs(m[i][i]));
  std::array<bool, K> dead{};
  for (std::size_t c = 0; c < K; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < K; ++r)
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    std::swap(m[c], m[piv]);
    if (std::fabs(m[c][c]) <= 1e-13L * scale) {
      dead[c] = true;
      continue;
    }
    for (std::size_t r = 0; r < K; ++r) {
      if (r == c) continue;
      const long double f = m[r][c] / m[c][c];
      for (std::size_t j = c; j <= K; ++j) m[r][j] -= f * m[c][j];
    }
  }
  std::array<double, K> out{};
  for (std::size_t c = 0; c < K; ++c) out[c] = dead[c] ? 0.0 : static_cast<double>(m[c][K] / m[c][c]);
  return out;
}

struct Standardized {
  std::vector<double> z;
  double mean = 0.0;
  double sd = 1.0;
};

// Given (t2, t3) on standardized q, the remaining parameters are linear.
struct Projection {
  std::array<double, 5> tau{};  // on standardized q
  double sse = 0.0;
};

double sigmoid_term(double t2, double t3, double q) {
  return 0.5 - 1.0 / (1.0 + std::exp(t2 * (q - t3)));
}

Projection project(const Standardized& s, std::span<const double> mos, double t2, double t3) {
  std::vector<std::array<double, 3>> rows(s.z.size());
  for (std::size_t i = 0; i < s.z.size(); ++i) rows[i] = {sigmoid_term(t2, t3, s.z[i]), s.z[i], 1.0};
  const auto c = least_squares<3>(rows, mos);
  Projection p;
  p.tau = {c[0], t2, t3, c[1], c[2]};
  for (std::size_t i = 0; i < s.z.size(); ++i) {
    const double e = logistic5(p.tau, s.z[i]) - mos[i];
    p.sse += e * e;
  }
  if (!std::isfinite(p.sse)) p.sse = std::numeric_limits<double>::infinity();
  return p;
}

// Nelder-Mead over (t2, t3) with the linear parameters projected out.
Projection nelder_mead(const Standardized& s, std::span<const double> mos, double t2, double t3, double step2,
                       double step3, int max_evals) {
  using Pt = std::array<double, 2>;
  std::array<Pt, 3> x{Pt{t2, t3}, Pt{t2 + step2, t3}, Pt{t2, t3 + step3}};
  std::array<double, 3> f{};
  int evals = 0;
  auto eval = [&](const Pt& p) {
    ++evals;
    return project(s, mos, p[0], p[1]).sse;
  };
  for (int i = 0; i < 3; ++i) f[i] = eval(x[i]);

  while (evals < max_evals) {
    std::array<int, 3> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return f[a] < f[b]; });
    const int best = idx[0], mid = idx[1], worst = idx[2];
    const double spread = std::fabs(f[worst] - f[best]);
    const double size = std::max({std::fabs(x[worst][0] - x[best][0]), std::fabs(x[worst][1] - x[best][1]),
                                  std::fabs(x[mid][0] - x[best][0]), std::fabs(x[mid][1] - x[best][1])});
    if (spread <= 1e-30 + 1e-15 * std::fabs(f[best]) && size < 1e-9) break;
    if (size < 1e-13) break;

    const Pt c{(x[best][0] + x[mid][0]) / 2.0, (x[best][1] + x[mid][1]) / 2.0};
    auto along = [&](double a) { return Pt{c[0] + a * (x[worst][0] - c[0]), c[1] + a * (x[worst][1] - c[1])}; };
    const Pt xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < f[best]) {
      const Pt xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        x[worst] = xe;
        f[worst] = fe;
      } else {
        x[worst] = xr;
        f[worst] = fr;
      }
    } else if (fr < f[mid]) {
      x[worst] = xr;
      f[worst] = fr;
    } else {
      const bool outside = fr < f[worst];
      const Pt xc = along(outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < (outside ? fr : f[worst])) {
        x[worst] = xc;
        f[worst] = fc;
      } else {
        for (int i : {mid, worst}) {
          x[i] = Pt{x[best][0] + 0.5 * (x[i][0] - x[best][0]), x[best][1] + 0.5 * (x[i][1] - x[best][1])};
          f[i] = eval(x[i]);
        }
      }
    }
  }
  const int best = static_cast<int>(std::min_element(f.begin(), f.end()) - f.begin());
  return project(s, mos, x[best][0], x[best][1]);
}

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void ScorePairs::validate() const {
  if (objective.size() != mos.size())
    throw DimensionMismatch("objective and MOS lengths differ: " + std::to_string(objective.size()) + " vs " +
                            std::to_string(mos.size()));
  if (objective.size() < kMinPairs)
    throw InvalidArgument("need at least " + std::to_string(kMinPairs) + " score pairs, got " +
                          std::to_string(objective.size()));
  for (std::size_t i = 0; i < objective.size(); ++i)
    if (!std::isfinite(objective[i]) || !std::isfinite(mos[i]))
      throw InvalidArgument("non-finite score at pair " + std::to_string(i));
}

double logistic5(const std::array<double, 5>& tau, double q) {
  return tau[0] * sigmoid_term(tau[1], tau[2], q) + tau[3] * q + tau[4];
}

LogisticFit fit_logistic5(const ScorePairs& pairs, const FitOptions& opts) {
  pairs.validate();
  const std::size_t n = pairs.size();
  LogisticFit fit;

  Standardized s;
  s.mean = mean_of(pairs.objective);
  double var = 0.0;
  for (double q : pairs.objective) var += (q - s.mean) * (q - s.mean);
  s.sd = std::sqrt(var / static_cast<double>(n));
  if (!(s.sd > 0.0) || s.sd < 1e-12 * std::max(1.0, std::fabs(s.mean))) {
    fit.linear_fallback = true;
    fit.tau = {0.0, 0.0, s.mean, 0.0, mean_of(pairs.mos)};
    double sse = 0.0;
    for (double m : pairs.mos) sse += (m - fit.tau[4]) * (m - fit.tau[4]);
    fit.rmse = std::sqrt(sse / static_cast<double>(n));
    return fit;
  }
  s.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.z[i] = (pairs.objective[i] - s.mean) / s.sd;

  // Straight line is always a candidate (t1 = 0).
  Projection best;
  {
    std::vector<std::array<double, 2>> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = {s.z[i], 1.0};
    const auto c = least_squares<2>(rows, pairs.mos);
    best.tau = {0.0, 1.0, 0.0, c[0], c[1]};
    for (std::size_t i = 0; i < n; ++i) {
      const double e = c[0] * s.z[i] + c[1] - pairs.mos[i];
      best.sse += e * e;
    }
  }

  // Initial slope 1/std(q) and centre median(q), in standardized units.
  const double t2_0 = 1.0;
  const double t3_0 = (median_of(pairs.objective) - s.mean) / s.sd;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  const int restarts = std::max(1, opts.restarts);
  for (int r = 0; r < restarts; ++r) {
    double t2 = t2_0, t3 = t3_0;
    if (r > 0) {
      t2 = t2_0 * std::exp(1.5 * jitter(rng)) * (r % 2 ? 1.0 : -1.0);
      t3 = t3_0 + jitter(rng);
    }
    const Projection p = nelder_mead(s, pairs.mos, t2, t3, 0.5 * std::fabs(t2), 0.5, opts.max_evaluations);
    if (p.sse < best.sse) best = p;
  }
  fit.restarts = restarts;

  // Back to the original q scale.
  fit.tau = {best.tau[0], best.tau[1] / s.sd, s.mean + s.sd * best.tau[2], best.tau[3] / s.sd,
             best.tau[4] - best.tau[3] * s.mean / s.sd};
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = fit(pairs.objective[i]) - pairs.mos[i];
    sse += e * e;
  }
  fit.rmse = std::sqrt(sse / static_cast<double>(n));
  return fit;
}

Statistic pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("pearson inputs differ in length");
  if (a.empty()) return {0.0, true};
  const double ma = mean_of(a), mb = mean_of(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  // Variance that is pure rounding noise counts as zero.
  const double tiny_a = 1e-24 * static_cast<double>(a.size()) * std::max(1.0, ma * ma);
  const double tiny_b = 1e-24 * static_cast<double>(b.size()) * std::max(1.0, mb * mb);
  if (saa <= tiny_a || sbb <= tiny_b) return {0.0, true};
  return {std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0), false};
}

Statistic plc(const ScorePairs& pairs, const LogisticFit& fit) {
  pairs.validate();
  std::vector<double> mapped(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) mapped[i] = fit(pairs.objective[i]);
  return pearson(mapped, pairs.mos);
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

Statistic srocc(const ScorePairs& pairs) {
  pairs.validate();
  const auto ra = average_ranks(pairs.objective);
  const auto rb = average_ranks(pairs.mos);
  return pearson(ra, rb);
}

Statistic krcc(const ScorePairs& pairs) {
  pairs.validate();
  const std::size_t n = pairs.size();
  std::vector<std::pair<double, double>> xy(n);
  for (std::size_t i = 0; i < n; ++i) xy[i] = {pairs.objective[i], pairs.mos[i]};
  std::sort(xy.begin(), xy.end());

  auto tie_pairs = [](auto first, auto last, auto same) {
    long long total = 0;
    for (auto it = first; it != last;) {
      auto jt = it;
      long long t = 0;
      while (jt != last && same(*jt, *it)) ++jt, ++t;
      total += t * (t - 1) / 2;
      it = jt;
    }
    return total;
  };
  const long long n0 = static_cast<long long>(n) * (static_cast<long long>(n) - 1) / 2;
  const long long n1 = tie_pairs(xy.begin(), xy.end(), [](auto& a, auto& b) { return a.first == b.first; });
  const long long n3 = tie_pairs(xy.begin(), xy.end(), [](auto& a, auto& b) { return a == b; });

  // Merge sort on y counts discordant pairs as swaps.
  std::vector<double> y(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = xy[i].second;
  long long swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n), hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (y[j] < y[i]) {
          swaps += static_cast<long long>(mid - i);
          buf[k++] = y[j++];
        } else {
          buf[k++] = y[i++];
        }
      }
      while (i < mid) buf[k++] = y[i++];
      while (j < hi) buf[k++] = y[j++];
    }
    std::swap(y, buf);
  }
  long long n2 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && y[j] == y[i]) ++j;
    const long long t = static_cast<long long>(j - i);
    n2 += t * (t - 1) / 2;
    i = j;
  }
  const double denom = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
  if (!(denom > 0.0)) return {0.0, true};
  const double s = static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps);
  return {std::clamp(s / denom, -1.0, 1.0), false};
}

Report evaluate(const ScorePairs& pairs, const FitOptions& opts) {
  pairs.validate();
  Report r;
  r.n = pairs.size();
  r.low_confidence = pairs.low_confidence();
  r.fit = fit_logistic5(pairs, opts);
  r.plc = plc(pairs, r.fit);
  r.srocc = srocc(pairs);
  r.krcc = krcc(pairs);
  return r;
}

}  // namespace biqme::eval
