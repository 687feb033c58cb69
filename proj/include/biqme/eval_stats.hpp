#pragma once

// Correlation statistics between objective scores and mean opinion scores:
// Pearson after a five-parameter logistic mapping, Spearman and Kendall.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace biqme::eval {

inline constexpr std::size_t kMinPairs = 4;
inline constexpr std::size_t kLowConfidencePairs = 20;

struct ScorePairs {
  std::vector<double> objective;
  std::vector<double> mos;

  std::size_t size() const { return objective.size(); }
  // Equal lengths, finite, at least kMinPairs.
  void validate() const;
  bool low_confidence() const { return size() < kLowConfidencePairs; }
};

// g(q) = t1 (0.5 - 1/(1 + exp(t2 (q - t3)))) + t4 q + t5
double logistic5(const std::array<double, 5>& tau, double q);

struct LogisticFit {
  std::array<double, 5> tau{};
  double rmse = 0.0;
  bool linear_fallback = false;  // constant objective scores
  int restarts = 0;

  double operator()(double q) const { return logistic5(tau, q); }
};

struct FitOptions {
  int restarts = 20;
  std::uint64_t seed = 0;
  int max_evaluations = 4000;  // per restart
};

LogisticFit fit_logistic5(const ScorePairs& pairs, const FitOptions& opts = {});

// Value plus a flag set when an input has zero variance (value then 0).
struct Statistic {
  double value = 0.0;
  bool degenerate = false;
};

Statistic pearson(std::span<const double> a, std::span<const double> b);
Statistic plc(const ScorePairs& pairs, const LogisticFit& fit);
Statistic srocc(const ScorePairs& pairs);
Statistic krcc(const ScorePairs& pairs);

// 1-based ranks with ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> v);

struct Report {
  std::size_t n = 0;
  bool low_confidence = false;
  LogisticFit fit;
  Statistic plc;
  Statistic srocc;
  Statistic krcc;
};

Report evaluate(const ScorePairs& pairs, const FitOptions& opts = {});

}  // namespace biqme::eval
