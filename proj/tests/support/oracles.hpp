#pragma once

// Slow, direct reference computations used to cross-check the library.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "biqme/image.hpp"

namespace biqme::testing {

// Half-sample symmetric reflection written out case by case.
inline int reflect(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

// out(x,y) = sum_{a,b} k(a,b) p(x - a + r, y - b + r), mirror boundaries.
inline PlaneF brute_convolve(const PlaneF& p, const PlaneF& k) {
  PlaneF out(p.width(), p.height());
  const int rx = k.width() / 2, ry = k.height() / 2;
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x) {
      double acc = 0.0;
      for (int b = 0; b < k.height(); ++b)
        for (int a = 0; a < k.width(); ++a)
          acc += k(a, b) * p(reflect(x - (a - rx), p.width()), reflect(y - (b - ry), p.height()));
      out(x, y) = acc;
    }
  return out;
}

inline double brute_entropy_of_levels(const std::vector<int>& levels) {
  std::vector<double> counts(256, 0.0);
  for (int v : levels) counts[v] += 1.0;
  double e = 0.0;
  for (double c : counts)
    if (c > 0) {
      const double p = c / static_cast<double>(levels.size());
      e -= p * std::log2(p);
    }
  return e;
}

inline PlaneF random_plane(int w, int h, std::uint64_t seed, double lo = 0.0, double hi = 255.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  PlaneF p(w, h);
  for (double& v : p.samples()) v = d(rng);
  return p;
}

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("biqme_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace biqme::testing
