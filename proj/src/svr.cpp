#include "biqme/svr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <list>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "biqme/error.hpp"
#include "biqme/hash.hpp"
#include "biqme/parallel.hpp"

namespace biqme::svr {

namespace {

constexpr double kTau = 1e-12;

// LRU cache of kernel rows over the normalized training rows.
class KernelRows {
 public:
  KernelRows(const std::vector<std::vector<double>>& x, double gamma, std::size_t cache_bytes)
      : x_(x), gamma_(gamma), rows_(x.size()), where_(x.size()) {
    const std::size_t row_bytes = std::max<std::size_t>(1, x.size()) * sizeof(double);
    capacity_ = std::max<std::size_t>(2, cache_bytes / row_bytes);
  }

  const std::vector<double>& row(std::size_t i) {
    if (!rows_[i].empty()) {
      lru_.splice(lru_.begin(), lru_, where_[i]);
      return rows_[i];
    }
    if (lru_.size() >= capacity_) {
      const std::size_t victim = lru_.back();
      lru_.pop_back();
      std::vector<double>().swap(rows_[victim]);
    }
    auto& r = rows_[i];
    r.resize(x_.size());
    for (std::size_t j = 0; j < x_.size(); ++j) r[j] = rbf_kernel(x_[i], x_[j], gamma_);
    lru_.push_front(i);
    where_[i] = lru_.begin();
    return r;
  }

 private:
  const std::vector<std::vector<double>>& x_;
  double gamma_;
  std::size_t capacity_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::list<std::size_t>::iterator> where_;
  std::list<std::size_t> lru_;
};

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void Hyper::validate() const {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("svr.t must be positive");
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidArgument("svr.p must be positive");
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("svr.k must be positive");
}

void TrainSet::add(std::vector<double> x, double y, int group) {
  features.push_back(std::move(x));
  labels.push_back(y);
  groups.push_back(group);
}

void TrainSet::validate(std::size_t min_rows) const {
  if (features.size() != labels.size()) throw InvalidArgument("feature and label counts differ");
  if (!groups.empty() && groups.size() != labels.size()) throw InvalidArgument("group and label counts differ");
  if (labels.size() < min_rows)
    throw InvalidArgument("training needs at least " + std::to_string(min_rows) + " rows, got " +
                          std::to_string(labels.size()));
  const std::size_t d = dim();
  if (d == 0) throw InvalidArgument("training rows have no features");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!std::isfinite(labels[i])) throw InvalidArgument("non-finite label at row " + std::to_string(i));
    if (features[i].size() != d) throw InvalidArgument("ragged feature row " + std::to_string(i));
    for (double v : features[i])
      if (!std::isfinite(v)) throw InvalidArgument("non-finite feature at row " + std::to_string(i));
  }
}

TrainSet TrainSet::subset(std::span<const std::size_t> rows) const {
  TrainSet out;
  for (std::size_t r : rows) {
    out.features.push_back(features[r]);
    out.labels.push_back(labels[r]);
    out.groups.push_back(groups.empty() ? -1 : groups[r]);
  }
  return out;
}

std::uint64_t TrainSet::fingerprint() const {
  Fnv1a h;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (double v : features[i]) h.update_value(v);
    h.update_value(labels[i]);
  }
  return h.digest();
}

double rbf_kernel(std::span<const double> a, std::span<const double> b, double k) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-k * d2);
}

std::vector<double> SvrModel::normalize(std::span<const double> x) const {
  if (x.size() != dim) throw DimensionMismatch("feature vector has " + std::to_string(x.size()) +
                                               " entries, model expects " + std::to_string(dim));
  std::vector<double> out(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    if (is_constant_feature(i)) {
      out[i] = 0.0;
      continue;
    }
    out[i] = std::clamp((x[i] - norm_lo[i]) / (norm_hi[i] - norm_lo[i]), 0.0, 1.0);
  }
  return out;
}

double SvrModel::predict(std::span<const double> x) const {
  const auto xn = normalize(x);
  double acc = 0.0;
  for (std::size_t j = 0; j < support_vectors.size(); ++j)
    acc += dual_coefs[j] * rbf_kernel(xn, support_vectors[j], gamma);
  return acc + bias;
}

std::vector<double> SvrModel::predict_batch(const std::vector<std::vector<double>>& xs) const {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(predict(x));
  return out;
}

TrainResult train_detailed(const TrainSet& data, const Hyper& hyper, const TrainOptions& opts) {
  data.validate(1);
  hyper.validate();
  if (!(opts.tolerance > 0.0)) throw InvalidArgument("solver tolerance must be positive");

  const std::size_t l = data.size();
  const std::size_t d = data.dim();
  TrainResult result;
  SvrModel& model = result.model;
  model.dim = d;
  model.gamma = hyper.k;
  model.hyper = hyper;
  model.fingerprint = data.fingerprint();
  model.norm_lo.assign(d, std::numeric_limits<double>::infinity());
  model.norm_hi.assign(d, -std::numeric_limits<double>::infinity());
  for (const auto& row : data.features)
    for (std::size_t f = 0; f < d; ++f) {
      model.norm_lo[f] = std::min(model.norm_lo[f], row[f]);
      model.norm_hi[f] = std::max(model.norm_hi[f], row[f]);
    }
  for (const auto& row : data.features) result.normalized_rows.push_back(model.normalize(row));
  const auto& x = result.normalized_rows;

  // Variables 0..l-1 carry sign +1, l..2l-1 sign -1 (LIBSVM's layout).
  const std::size_t n = 2 * l;
  const double c = hyper.t;
  std::vector<double> alpha(n, 0.0), grad(n);
  std::vector<signed char> sign(n);
  for (std::size_t i = 0; i < l; ++i) {
    sign[i] = 1;
    sign[i + l] = -1;
    grad[i] = hyper.p - data.labels[i];
    grad[i + l] = hyper.p + data.labels[i];
  }
  auto at_upper = [&](std::size_t i) { return alpha[i] >= c; };
  auto at_lower = [&](std::size_t i) { return alpha[i] <= 0.0; };

  KernelRows kernel(x, hyper.k, opts.cache_bytes);
  // Q[i][j] = s_i s_j K(i mod l, j mod l); K(i,i) = 1 for the RBF kernel.
  auto q_entry = [&](const std::vector<double>& krow, std::size_t i, std::size_t j) {
    return sign[i] * sign[j] * krow[j < l ? j : j - l];
  };

  // Variables that sit at a bound and are unlikely to move are shrunk out of
  // the working set; the full gradient is rebuilt before declaring optimality.
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), 0);
  bool unshrunk = false;

  auto reconstruct_gradient = [&] {
    if (active.size() == n) return;
    std::vector<char> is_active(n, 0);
    for (std::size_t t : active) is_active[t] = 1;
    std::vector<std::size_t> inactive;
    for (std::size_t t = 0; t < n; ++t)
      if (!is_active[t]) {
        inactive.push_back(t);
        grad[t] = t < l ? hyper.p - data.labels[t] : hyper.p + data.labels[t - l];
      }
    for (std::size_t j = 0; j < n; ++j) {
      if (alpha[j] == 0.0) continue;
      const auto& kj = kernel.row(j < l ? j : j - l);
      for (std::size_t t : inactive) grad[t] += alpha[j] * q_entry(kj, j, t);
    }
    active.resize(n);
    std::iota(active.begin(), active.end(), 0);
  };

  auto shrink = [&] {
    double gmax1 = -std::numeric_limits<double>::infinity(), gmax2 = gmax1;
    for (std::size_t t : active) {
      if (sign[t] == 1) {
        if (!at_upper(t)) gmax1 = std::max(gmax1, -grad[t]);
        if (!at_lower(t)) gmax2 = std::max(gmax2, grad[t]);
      } else {
        if (!at_lower(t)) gmax1 = std::max(gmax1, grad[t]);
        if (!at_upper(t)) gmax2 = std::max(gmax2, -grad[t]);
      }
    }
    if (!unshrunk && gmax1 + gmax2 <= opts.tolerance * 10.0) {
      unshrunk = true;
      reconstruct_gradient();
    }
    auto shrinkable = [&](std::size_t t) {
      if (at_upper(t)) return sign[t] == 1 ? -grad[t] > gmax1 : -grad[t] > gmax2;
      if (at_lower(t)) return sign[t] == 1 ? grad[t] > gmax2 : grad[t] > gmax1;
      return false;
    };
    active.erase(std::remove_if(active.begin(), active.end(), shrinkable), active.end());
  };

  long long iter = 0;
  double gap = std::numeric_limits<double>::infinity();
  long long shrink_counter = static_cast<long long>(std::min<std::size_t>(l, 1000));
  while (true) {
    if (--shrink_counter == 0) {
      shrink_counter = static_cast<long long>(std::min<std::size_t>(l, 1000));
      shrink();
    }

    // i: maximal violator; j: partner with the best second-order decrease.
    std::ptrdiff_t gmax_idx = -1, gmin_idx = -1;
    double gmax = -std::numeric_limits<double>::infinity(), gmax2 = gmax;
    const std::vector<double>* krow_i = nullptr;
    auto select = [&] {
      gmax = gmax2 = -std::numeric_limits<double>::infinity();
      gmax_idx = gmin_idx = -1;
      for (std::size_t t : active) {
        if (sign[t] == 1) {
          if (!at_upper(t) && -grad[t] >= gmax) {
            gmax = -grad[t];
            gmax_idx = static_cast<std::ptrdiff_t>(t);
          }
        } else if (!at_lower(t) && grad[t] >= gmax) {
          gmax = grad[t];
          gmax_idx = static_cast<std::ptrdiff_t>(t);
        }
      }
      krow_i = nullptr;
      const std::size_t i = gmax_idx < 0 ? 0 : static_cast<std::size_t>(gmax_idx);
      if (gmax_idx >= 0) krow_i = &kernel.row(i < l ? i : i - l);
      double obj_min = std::numeric_limits<double>::infinity();
      for (std::size_t j : active) {
        if (sign[j] == 1) {
          if (at_lower(j)) continue;
          const double grad_diff = gmax + grad[j];
          gmax2 = std::max(gmax2, grad[j]);
          if (grad_diff > 0.0 && krow_i) {
            const double quad = std::max(2.0 - 2.0 * sign[i] * q_entry(*krow_i, i, j), kTau);
            const double obj = -grad_diff * grad_diff / quad;
            if (obj <= obj_min) {
              gmin_idx = static_cast<std::ptrdiff_t>(j);
              obj_min = obj;
            }
          }
        } else {
          if (at_upper(j)) continue;
          const double grad_diff = gmax - grad[j];
          gmax2 = std::max(gmax2, -grad[j]);
          if (grad_diff > 0.0 && krow_i) {
            const double quad = std::max(2.0 + 2.0 * sign[i] * q_entry(*krow_i, i, j), kTau);
            const double obj = -grad_diff * grad_diff / quad;
            if (obj <= obj_min) {
              gmin_idx = static_cast<std::ptrdiff_t>(j);
              obj_min = obj;
            }
          }
        }
      }
      gap = gmax + gmax2;
      return gap < opts.tolerance || gmin_idx < 0;
    };

    if (select()) {
      if (active.size() == n) break;
      // Optimal on the shrunk problem; confirm on the full one.
      reconstruct_gradient();
      shrink_counter = 1;
      if (select()) break;
    }
    if (iter >= opts.max_iterations)
      throw ConvergenceError("SMO did not converge within " + std::to_string(opts.max_iterations) +
                                 " pair updates",
                             gap);
    ++iter;

    const std::size_t i = static_cast<std::size_t>(gmax_idx);
    const std::size_t j = static_cast<std::size_t>(gmin_idx);
    const std::vector<double> ki = *krow_i;  // copy: fetching row j may evict it
    const auto& kj = kernel.row(j < l ? j : j - l);
    const double qij = q_entry(ki, i, j);
    const double old_ai = alpha[i], old_aj = alpha[j];

    if (sign[i] != sign[j]) {
      const double quad = std::max(2.0 + 2.0 * qij, kTau);
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      const double quad = std::max(2.0 - 2.0 * qij, kTau);
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
    for (std::size_t t : active) grad[t] += q_entry(ki, i, t) * dai + q_entry(kj, j, t) * daj;
  }

  // Bias from free variables, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  std::size_t nr_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = sign[t] * grad[t];
    if (at_upper(t)) {
      if (sign[t] == -1)
        ub = std::min(ub, yg);
      else
        lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (sign[t] == 1)
        ub = std::min(ub, yg);
      else
        lb = std::max(lb, yg);
    } else {
      ++nr_free;
      sum_free += yg;
    }
  }
  const double rho = nr_free > 0 ? sum_free / static_cast<double>(nr_free) : 0.5 * (ub + lb);

  model.bias = -rho;
  model.kkt_residual = std::max(gap, 0.0);
  model.iterations = iter;
  result.alpha_upper.assign(alpha.begin(), alpha.begin() + static_cast<std::ptrdiff_t>(l));
  result.alpha_lower.assign(alpha.begin() + static_cast<std::ptrdiff_t>(l), alpha.end());
  for (std::size_t s = 0; s < l; ++s) {
    const double coef = alpha[s] - alpha[s + l];
    if (coef != 0.0) {
      model.support_vectors.push_back(x[s]);
      model.dual_coefs.push_back(coef);
    }
  }
  return result;
}

SvrModel train(const TrainSet& data, const Hyper& hyper, const TrainOptions& opts) {
  data.validate(kMinTrainRows);
  return train_detailed(data, hyper, opts).model;
}

std::vector<int> assign_folds(const TrainSet& data, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
  const std::size_t n = data.size();
  std::vector<int> fold(n, 0);
  std::mt19937_64 rng(seed);

  const bool grouped = !data.groups.empty() &&
                       std::none_of(data.groups.begin(), data.groups.end(), [](int g) { return g < 0; });
  if (grouped) {
    std::vector<int> ids(data.groups.begin(), data.groups.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (static_cast<int>(ids.size()) >= folds) {
      std::shuffle(ids.begin(), ids.end(), rng);
      std::vector<std::pair<int, int>> group_fold;
      for (std::size_t k = 0; k < ids.size(); ++k) group_fold.emplace_back(ids[k], static_cast<int>(k % folds));
      std::sort(group_fold.begin(), group_fold.end());
      for (std::size_t r = 0; r < n; ++r) {
        auto it = std::lower_bound(group_fold.begin(), group_fold.end(), std::pair{data.groups[r], -1});
        fold[r] = it->second;
      }
      return fold;
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 0; k < n; ++k) fold[order[k]] = static_cast<int>(k % folds);
  return fold;
}

GridResult grid_search(const TrainSet& data, const GridSpec& spec, const TrainOptions& opts) {
  data.validate(kMinTrainRows);
  if (spec.t_values.empty() || spec.k_values.empty() || spec.p_values.empty())
    throw InvalidArgument("grid search needs at least one value per hyperparameter");
  const auto fold = assign_folds(data, spec.folds, spec.seed);

  std::vector<std::vector<std::size_t>> train_rows(spec.folds), test_rows(spec.folds);
  for (std::size_t r = 0; r < data.size(); ++r)
    for (int f = 0; f < spec.folds; ++f) (fold[r] == f ? test_rows : train_rows)[f].push_back(r);

  GridResult result;
  for (double t : spec.t_values)
    for (double k : spec.k_values)
      for (double p : spec.p_values) result.table.push_back({Hyper{t, p, k}, 0.0});

  auto evaluate = [&](GridPoint& gp) {
    double sq = 0.0;
    std::size_t count = 0;
    for (int f = 0; f < spec.folds; ++f) {
      if (test_rows[f].empty() || train_rows[f].empty()) continue;
      const SvrModel m = train_detailed(data.subset(train_rows[f]), gp.hyper, opts).model;
      for (std::size_t r : test_rows[f]) {
        const double e = m.predict(data.features[r]) - data.labels[r];
        sq += e * e;
        ++count;
      }
    }
    gp.cv_rmse = std::sqrt(sq / static_cast<double>(std::max<std::size_t>(count, 1)));
  };

  parallel_for(result.table.size(), spec.jobs, [&](std::size_t i) { evaluate(result.table[i]); });

  // Lowest RMSE wins; ties go to the earliest grid point.
  const auto best = std::min_element(result.table.begin(), result.table.end(),
                                     [](const GridPoint& a, const GridPoint& b) { return a.cv_rmse < b.cv_rmse; });
  result.best = best->hyper;
  result.best_rmse = best->cv_rmse;
  return result;
}

void save(const SvrModel& model, std::ostream& os) {
  os << kModelMagic << " v" << kModelVersion << '\n';
  os << "dim " << model.dim << '\n';
  os << "gamma " << format_double(model.gamma) << '\n';
  os << "bias " << format_double(model.bias) << '\n';
  os << "t " << format_double(model.hyper.t) << '\n';
  os << "p " << format_double(model.hyper.p) << '\n';
  os << "kkt_residual " << format_double(model.kkt_residual) << '\n';
  os << "iterations " << model.iterations << '\n';
  {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    std::uint64_t v = model.fingerprint;
    for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
    os << "fingerprint " << s << '\n';
  }
  os << "norm_lo";
  for (double v : model.norm_lo) os << ' ' << format_double(v);
  os << "\nnorm_hi";
  for (double v : model.norm_hi) os << ' ' << format_double(v);
  os << "\nsupport_vectors " << model.support_vectors.size() << '\n';
  for (std::size_t j = 0; j < model.support_vectors.size(); ++j) {
    os << format_double(model.dual_coefs[j]);
    for (double v : model.support_vectors[j]) os << ' ' << format_double(v);
    os << '\n';
  }
  os << "end\n";
}

void save(const SvrModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file " + path.string());
  save(model, out);
  if (!out) throw IoError("failed writing model file " + path.string());
}

namespace {

// Line/token reader that reports byte offsets.
class ModelReader {
 public:
  explicit ModelReader(std::string_view text) : text_(text) {}

  bool at_end() const { return pos_ >= text_.size(); }

  // Next line without the newline; throws at end of input.
  std::string_view line(const char* what) {
    if (at_end()) throw ParseError(std::string("unexpected end of model file, expected ") + what, pos_);
    line_start_ = pos_;
    const auto nl = text_.find('\n', pos_);
    const auto end = nl == std::string_view::npos ? text_.size() : nl;
    std::string_view l = text_.substr(pos_, end - pos_);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    pos_ = nl == std::string_view::npos ? text_.size() : nl + 1;
    return l;
  }

  std::size_t line_start() const { return line_start_; }

  // Splits "key v1 v2 ..." into tokens with their offsets.
  std::vector<std::pair<std::string_view, std::size_t>> tokens(std::string_view l) const {
    std::vector<std::pair<std::string_view, std::size_t>> out;
    std::size_t i = 0;
    while (i < l.size()) {
      while (i < l.size() && l[i] == ' ') ++i;
      const std::size_t b = i;
      while (i < l.size() && l[i] != ' ') ++i;
      if (i > b) out.emplace_back(l.substr(b, i - b), line_start_ + b);
    }
    return out;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
};

double parse_number(std::string_view tok, std::size_t offset) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError("malformed number '" + std::string(tok) + "'", offset);
  return v;
}

long long parse_integer(std::string_view tok, std::size_t offset) {
  long long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || v < 0)
    throw ParseError("malformed count '" + std::string(tok) + "'", offset);
  return v;
}

}  // namespace

SvrModel parse_model(std::string_view text) {
  ModelReader rd(text);
  const std::string_view header = rd.line("header");
  const std::string magic = std::string(kModelMagic) + " v";
  if (header.substr(0, magic.size()) != magic) throw ParseError("not a BIQME-SVR model file", 0);
  const std::string_view ver = header.substr(magic.size());
  const long long version = parse_integer(ver, magic.size());
  if (version != kModelVersion)
    throw UnsupportedVersion("model file version " + std::to_string(version) + " is not supported (expected " +
                             std::to_string(kModelVersion) + ")");

  auto keyed = [&](const char* key, std::size_t count) {
    const auto l = rd.line(key);
    auto toks = rd.tokens(l);
    if (toks.empty() || toks[0].first != key)
      throw ParseError(std::string("expected '") + key + "'", rd.line_start());
    if (toks.size() != count + 1)
      throw ParseError(std::string("'") + key + "' expects " + std::to_string(count) + " value(s)", rd.line_start());
    toks.erase(toks.begin());
    return toks;
  };

  SvrModel m;
  {
    const auto t = keyed("dim", 1);
    m.dim = static_cast<std::size_t>(parse_integer(t[0].first, t[0].second));
    if (m.dim == 0 || m.dim > 4096) throw ParseError("implausible feature dimension", t[0].second);
  }
  auto scalar = [&](const char* key) {
    const auto t = keyed(key, 1);
    return parse_number(t[0].first, t[0].second);
  };
  m.gamma = scalar("gamma");
  m.bias = scalar("bias");
  m.hyper.t = scalar("t");
  m.hyper.p = scalar("p");
  m.hyper.k = m.gamma;
  m.kkt_residual = scalar("kkt_residual");
  {
    const auto t = keyed("iterations", 1);
    m.iterations = parse_integer(t[0].first, t[0].second);
  }
  {
    const auto t = keyed("fingerprint", 1);
    std::uint64_t fp = 0;
    const auto tok = t[0].first;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), fp, 16);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || tok.size() != 16)
      throw ParseError("malformed fingerprint", t[0].second);
    m.fingerprint = fp;
  }
  for (auto [key, dst] : {std::pair{"norm_lo", &m.norm_lo}, std::pair{"norm_hi", &m.norm_hi}}) {
    for (const auto& [tok, off] : keyed(key, m.dim)) dst->push_back(parse_number(tok, off));
  }
  std::size_t nsv = 0;
  {
    const auto t = keyed("support_vectors", 1);
    nsv = static_cast<std::size_t>(parse_integer(t[0].first, t[0].second));
    if (nsv > text.size()) throw ParseError("support vector count exceeds file size", t[0].second);
  }
  for (std::size_t j = 0; j < nsv; ++j) {
    const auto l = rd.line("support vector");
    const auto toks = rd.tokens(l);
    if (toks.size() != m.dim + 1)
      throw ParseError("support vector line needs " + std::to_string(m.dim + 1) + " numbers", rd.line_start());
    m.dual_coefs.push_back(parse_number(toks[0].first, toks[0].second));
    std::vector<double> sv;
    for (std::size_t f = 1; f < toks.size(); ++f) sv.push_back(parse_number(toks[f].first, toks[f].second));
    m.support_vectors.push_back(std::move(sv));
  }
  if (rd.line("end") != "end") throw ParseError("expected 'end'", rd.line_start());
  if (!(m.gamma > 0.0)) throw ParseError("gamma must be positive", 0);
  return m;
}

SvrModel load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace biqme::svr
