#pragma once

// Epsilon-insensitive support vector regression with an RBF kernel.
//
// Training solves the standard dual with sequential minimal optimization:
// the working pair is the maximal KKT violator plus the partner giving the
// largest second-order decrease. Features are min-max scaled to [0,1] with
// the ranges of the training set, and the ranges travel with the model.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace biqme::svr {

struct Hyper {
  double t = 256.0;         // box constraint (penalty on tube violations)
  double p = 0.01;          // tube half-width
  double k = 1.0 / 17.0;    // RBF width: exp(-k ||a - b||^2)

  void validate() const;
};

struct TrainOptions {
  double tolerance = 1e-3;               // stop when the KKT gap falls below
  long long max_iterations = 10'000'000; // pair updates before giving up
  std::size_t cache_bytes = 256u << 20;  // kernel row cache
};

struct TrainSet {
  std::vector<std::vector<double>> features;
  std::vector<double> labels;
  // Optional source-image id per row; cross-validation keeps groups intact.
  std::vector<int> groups;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.empty() ? 0 : features.front().size(); }
  void add(std::vector<double> x, double y, int group = -1);
  void validate(std::size_t min_rows = 1) const;
  TrainSet subset(std::span<const std::size_t> rows) const;
  std::uint64_t fingerprint() const;
};

inline constexpr std::size_t kMinTrainRows = 50;

struct SvrModel {
  std::size_t dim = 0;
  std::vector<double> norm_lo;
  std::vector<double> norm_hi;
  std::vector<std::vector<double>> support_vectors;  // already normalized
  std::vector<double> dual_coefs;
  double bias = 0.0;
  double gamma = 0.0;
  Hyper hyper;
  double kkt_residual = 0.0;
  long long iterations = 0;
  std::uint64_t fingerprint = 0;

  // Min-max scaling to [0,1], clamped; constant training features map to 0.
  std::vector<double> normalize(std::span<const double> x) const;
  double predict(std::span<const double> x) const;
  std::vector<double> predict_batch(const std::vector<std::vector<double>>& xs) const;
  bool is_constant_feature(std::size_t i) const { return !(norm_lo[i] < norm_hi[i]); }
};

struct TrainResult {
  SvrModel model;
  // Dual variables per training row: upper-side (f below y) and lower-side.
  std::vector<double> alpha_upper;
  std::vector<double> alpha_lower;
  std::vector<std::vector<double>> normalized_rows;
};

// Requires at least kMinTrainRows rows.
SvrModel train(const TrainSet& data, const Hyper& hyper = {}, const TrainOptions& opts = {});
// Same solver with no row-count floor; exposes the full dual solution.
TrainResult train_detailed(const TrainSet& data, const Hyper& hyper, const TrainOptions& opts = {});

double rbf_kernel(std::span<const double> a, std::span<const double> b, double k);

struct GridSpec {
  std::vector<double> t_values{1, 16, 256, 4096};
  std::vector<double> k_values{1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 1, 2, 4};
  std::vector<double> p_values{0.005, 0.01, 0.05};
  int folds = 5;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct GridPoint {
  Hyper hyper;
  double cv_rmse = 0.0;
};

struct GridResult {
  Hyper best;
  double best_rmse = 0.0;
  std::vector<GridPoint> table;  // in grid order (t, k, p nested)
};

// Deterministic fold id per row: by group when groups are present, else by row.
std::vector<int> assign_folds(const TrainSet& data, int folds, std::uint64_t seed);
GridResult grid_search(const TrainSet& data, const GridSpec& spec = {}, const TrainOptions& opts = {});

// Plain-text, versioned, exact round trip.
inline constexpr const char* kModelMagic = "BIQME-SVR";
inline constexpr int kModelVersion = 1;

void save(const SvrModel& model, std::ostream& os);
void save(const SvrModel& model, const std::filesystem::path& path);
SvrModel parse_model(std::string_view text);
SvrModel load(const std::filesystem::path& path);

}  // namespace biqme::svr
