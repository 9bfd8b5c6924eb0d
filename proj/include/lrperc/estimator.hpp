#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lrperc/rng.hpp"

namespace lrperc {

/// Monte Carlo output record: mean, standard error, sample count, seed,
/// free-form metadata and the autocorrelation time of the underlying series.
struct EstimatorResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> metadata;
  double tau_int = 0.5;  // integrated autocorrelation time; 0.5 for independent samples

  std::string meta(const std::string& key) const {
    for (const auto& [k, v] : metadata) {
      if (k == key) return v;
    }
    return {};
  }
};

// Welford running mean/variance.
class MeanAccumulator {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Proportion estimate with binomial standard error sqrt(p(1-p)/n).
inline EstimatorResult proportion(std::uint64_t hits, std::uint64_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("proportion: n must be positive");
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n, seed, {}};
}

inline EstimatorResult from_accumulator(const MeanAccumulator& acc, std::uint64_t seed) {
  return {acc.mean(), acc.std_error(), acc.count(), seed, {}};
}

struct BatchMeans {
  double mean = 0.0;
  double std_error = 0.0;
  double tau_int = 0.5;  // 0.5 for an uncorrelated series
};

/// Batch-means error bar for a correlated series. tau_int is estimated as
/// batch_len * Var(batch means) / (2 Var(series)).
inline BatchMeans batch_means(const std::vector<double>& series, std::size_t batches = 32) {
  if (series.empty()) throw std::invalid_argument("batch_means: empty series");
  batches = std::max<std::size_t>(1, std::min(batches, series.size()));
  const std::size_t len = series.size() / batches;
  MeanAccumulator all;
  for (double x : series) all.add(x);
  MeanAccumulator bm;
  for (std::size_t b = 0; b < batches; ++b) {
    double sum = 0.0;
    for (std::size_t k = b * len; k < (b + 1) * len; ++k) sum += series[k];
    bm.add(sum / static_cast<double>(len));
  }
  BatchMeans out;
  out.mean = all.mean();
  out.std_error = batches > 1 ? bm.std_error() : all.std_error();
  const double var = all.variance();
  out.tau_int = (var > 0.0 && batches > 1) ? static_cast<double>(len) * bm.variance() / (2.0 * var) : 0.5;
  return out;
}

/// Number of worker threads used for replicate loops. Results never depend
/// on it.
inline std::atomic<unsigned>& worker_threads() {
  static std::atomic<unsigned> n{std::max(1u, std::thread::hardware_concurrency())};
  return n;
}

namespace detail {
// Set on pool threads so nested parallel_map calls run inline.
inline bool& inside_pool() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

/// Calls fn(k) for k in [0, n) on the worker pool and returns the results in
/// index order. Nested calls from a pool thread run serially.
template <typename T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  const std::size_t workers =
      detail::inside_pool() ? 1 : std::min<std::size_t>(worker_threads().load(), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) out[k] = fn(k);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      detail::inside_pool() = true;
      try {
        for (std::size_t k = next++; k < n && !failed; k = next++) out[k] = fn(k);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Seed of replicate k under a master seed.
inline std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t k) {
  return derive_key(master, {0x7265706cULL, k});
}

inline void require_samples(std::uint64_t n, std::uint64_t minimum = 100) {
  if (n < minimum) {
    throw std::invalid_argument("need at least " + std::to_string(minimum) + " samples (got " + std::to_string(n) + ")");
  }
}

}  // namespace lrperc
