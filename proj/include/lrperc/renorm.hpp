#pragma once

// K-blocks, theta-goodness and the block-merging machinery.
//
// B^i_K = [K(i-1), K(i+1)) has length 2K; consecutive blocks overlap on K
// sites. A block is theta-good when it holds a cluster (edges with both
// endpoints inside the block) of at least ceil(2 theta K) vertices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrperc/cluster.hpp"
#include "lrperc/estimator.hpp"
#include "lrperc/model.hpp"
#include "lrperc/sampler.hpp"

namespace lrperc {

struct BlockSpec {
  Vertex K = 1;
  Vertex i = 0;

  Interval interval() const {
    if (K < 1) throw std::invalid_argument("block scale K must be >= 1");
    return Interval(K * (i - 1), K * (i + 1));
  }
  friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

struct BlockReport {
  BlockSpec block;
  double theta = 0.0;
  bool good = false;
  std::size_t largest_size = 0;
};

/// Smallest cluster size that makes a K-block theta-good: ceil(2 theta K).
/// A 1e-9 slack keeps products like 2 * 0.9 * 10 from rounding up.
inline std::size_t good_threshold(Vertex K, double theta) {
  return static_cast<std::size_t>(std::ceil(2.0 * theta * static_cast<double>(K) - 1e-9));
}

inline void require_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0,1)");
}

inline BlockReport is_theta_good(const Configuration& config, const BlockSpec& block, double theta) {
  require_theta(theta);
  const Interval b = block.interval();
  if (!config.box().contains(b)) throw std::invalid_argument("is_theta_good: block outside the sampled box");
  const auto largest = largest_cluster(clusters_in(config, b));
  return {block, theta, largest.size >= good_threshold(block.K, theta), largest.size};
}

/// Number of clusters in the block of size >= ceil(2 theta K). At most one
/// when theta > 3/4.
inline std::size_t count_large_clusters(const Configuration& config, const BlockSpec& block, double theta) {
  require_theta(theta);
  const auto part = clusters_in(config, block.interval());
  const auto t = good_threshold(block.K, theta);
  return static_cast<std::size_t>(
      std::count_if(part.component_sizes().begin(), part.component_sizes().end(), [&](std::size_t s) { return s >= t; }));
}

/// Monte Carlo estimate of P[B_K is theta-bad]. Goodness only depends on
/// edges inside B_K, so each replicate samples exactly [-K, K).
inline EstimatorResult estimate_p_bad(Vertex K, double theta, const ModelParams& params, std::uint64_t n,
                                      std::uint64_t seed) {
  if (K < 2) throw std::invalid_argument("estimate_p_bad: K must be >= 2");
  require_theta(theta);
  require_samples(n);
  validate_params(params);
  const BlockSpec block{K, 0};
  const auto bad = parallel_map<std::uint8_t>(n, [&](std::size_t k) {
    const auto config = sample_config(block.interval(), params, replicate_seed(seed, k));
    return static_cast<std::uint8_t>(!is_theta_good(config, block, theta).good);
  });
  std::uint64_t hits = 0;
  for (auto b : bad) hits += b;
  auto out = proportion(hits, n, seed);
  out.metadata = {{"K", std::to_string(K)}, {"theta", std::to_string(theta)}};
  return out;
}

inline Interval big_block(Vertex K, Vertex C) { return BlockSpec{C * K, 0}.interval(); }

/// Reports for every K-block B^j_K inside B_{CK}, j = -C+1 .. C-1.
inline std::vector<BlockReport> block_reports(const Configuration& config, Vertex K, Vertex C, double theta) {
  if (C < 1) throw std::invalid_argument("block_reports: C must be >= 1");
  std::vector<BlockReport> out;
  out.reserve(static_cast<std::size_t>(2 * C - 1));
  for (Vertex j = -C + 1; j <= C - 1; ++j) out.push_back(is_theta_good(config, BlockSpec{K, j}, theta));
  return out;
}

/// Deterministic merging step: if every K-block in B_{CK} is theta-good with
/// theta > 3/4, then B_{CK} holds a cluster of at least ceil(2 theta C K)
/// vertices. Returns whether the implication holds on `config`; false is a
/// bug witness.
inline bool verify_merge_lemma(const Configuration& config, Vertex K, Vertex C, double theta) {
  if (!(theta > 0.75)) throw std::invalid_argument("verify_merge_lemma: theta must exceed 3/4");
  require_theta(theta);
  if (!config.box().contains(big_block(K, C))) throw std::invalid_argument("verify_merge_lemma: box must contain B_CK");
  for (const auto& r : block_reports(config, K, C, theta)) {
    if (!r.good) return true;
  }
  return largest_cluster(clusters_in(config, big_block(K, C))).size >= good_threshold(C * K, theta);
}

/// E_i: block i is bad while every block outside {i-1, i, i+1} is good.
/// `reports` must cover j = -C+1 .. C-1 exactly once at a common K and theta.
inline bool detect_E_i(const std::vector<BlockReport>& reports, Vertex i) {
  if (reports.empty()) throw std::invalid_argument("detect_E_i: incomplete report set");
  const Vertex K = reports.front().block.K;
  const double theta = reports.front().theta;
  const auto C = static_cast<Vertex>((reports.size() + 1) / 2);
  std::vector<std::uint8_t> present(reports.size(), 0);
  std::vector<std::uint8_t> good(reports.size(), 0);
  for (const auto& r : reports) {
    const Vertex j = r.block.i;
    if (reports.size() % 2 == 0 || r.block.K != K || r.theta != theta || j < -C + 1 || j > C - 1) {
      throw std::invalid_argument("detect_E_i: incomplete report set");
    }
    auto& p = present[static_cast<std::size_t>(j + C - 1)];
    if (p) throw std::invalid_argument("detect_E_i: duplicate block report");
    p = 1;
    good[static_cast<std::size_t>(j + C - 1)] = r.good;
  }
  if (i < -C + 1 || i > C - 1) throw std::invalid_argument("detect_E_i: index outside the report range");
  if (good[static_cast<std::size_t>(i + C - 1)]) return false;
  for (Vertex j = -C + 1; j <= C - 1; ++j) {
    if (std::abs(j - i) <= 1) continue;
    if (!good[static_cast<std::size_t>(j + C - 1)]) return false;
  }
  return true;
}

/// F_i = E_i and B_{CK} is theta'-bad.
inline bool detect_F_i(const Configuration& config, Vertex K, Vertex C, Vertex i, double theta,
                       double theta_prime) {
  if (!(theta_prime < theta)) throw std::invalid_argument("detect_F_i: theta_prime must be below theta");
  require_theta(theta_prime);
  if (!config.box().contains(big_block(K, C))) throw std::invalid_argument("detect_F_i: box must contain B_CK");
  if (!detect_E_i(block_reports(config, K, C, theta), i)) return false;
  return !is_theta_good(config, BlockSpec{C * K, 0}, theta_prime).good;
}

/// Realizations of the left and right merged clusters around block i.
/// cminus is ordered x_1 > x_2 > ... (all below anchor), cplus y_1 < y_2 < ...
/// (all at or above anchor).
struct DensitySets {
  std::vector<Vertex> cminus;
  std::vector<Vertex> cplus;
  Vertex anchor = 0;  // K * i
  Vertex K = 1;
  double theta = 0.9;
};

/// Checks ordering, disjointness and the density spacing
/// x_a >= Ki - 3K - (a-1)/theta, y_b <= Ki + 3K + (b-1)/theta.
/// Returns an empty string when valid.
inline std::string density_violation(const DensitySets& d) {
  for (std::size_t a = 0; a < d.cminus.size(); ++a) {
    if (d.cminus[a] >= d.anchor) return "cminus element not below anchor";
    if (a > 0 && d.cminus[a] >= d.cminus[a - 1]) return "cminus not strictly decreasing";
    if (static_cast<double>(d.cminus[a]) < static_cast<double>(d.anchor - 3 * d.K) - static_cast<double>(a) / d.theta - 1e-9) {
      return "cminus violates the density spacing";
    }
  }
  for (std::size_t b = 0; b < d.cplus.size(); ++b) {
    if (d.cplus[b] < d.anchor) return "cplus element below anchor";
    if (b > 0 && d.cplus[b] <= d.cplus[b - 1]) return "cplus not strictly increasing";
    if (static_cast<double>(d.cplus[b]) > static_cast<double>(d.anchor + 3 * d.K) + static_cast<double>(b) / d.theta + 1e-9) {
      return "cplus violates the density spacing";
    }
  }
  for (Vertex x : d.cminus) {
    if (std::find(d.cplus.begin(), d.cplus.end(), x) != d.cplus.end()) return "overlapping sets";
  }
  return {};
}

/// -log of the closed-pair weight: beta * sum_{a,b} J(y_b - x_a).
inline double closed_pair_log_weight(const DensitySets& sets, double beta, double s = 2.0) {
  if (auto v = density_violation(sets); !v.empty()) throw std::invalid_argument("closed_pair_weight: " + v);
  double sum = 0.0;
  for (Vertex x : sets.cminus) {
    double row = 0.0;
    for (Vertex y : sets.cplus) row += coupling(y - x, s);
    sum += row;
  }
  return beta * sum;
}

/// prod_{x in C-} prod_{y in C+} exp(-beta J(x, y)).
inline double closed_pair_weight(const DensitySets& sets, double beta, double s = 2.0) {
  return std::exp(-closed_pair_log_weight(sets, beta, s));
}

/// (12 / (C - |i|))^(beta theta^2).
inline double f_i_bound(Vertex C, Vertex i, double beta, double theta) {
  const Vertex gap = C - std::abs(i);
  if (gap <= 0) throw std::invalid_argument("f_i_bound: require |i| < C");
  return std::pow(12.0 / static_cast<double>(gap), beta * theta * theta);
}

/// Worst case for the closed-pair weight around block i of B_{CK}: the
/// minimal admissible count ceil(theta K (C - |i| - 2)) on each side, each
/// element pushed to the farthest integer the density spacing allows.
inline DensitySets max_spread_density_sets(Vertex K, Vertex C, Vertex i, double theta) {
  require_theta(theta);
  const Vertex room = C - std::abs(i) - 2;
  if (room <= 0) throw std::invalid_argument("max_spread_density_sets: require C - |i| > 2");
  const auto count = static_cast<std::size_t>(std::ceil(theta * static_cast<double>(K * room) - 1e-9));
  DensitySets d;
  d.anchor = K * i;
  d.K = K;
  d.theta = theta;
  d.cminus.reserve(count);
  d.cplus.reserve(count);
  for (std::size_t a = 0; a < count; ++a) {
    const double shift = static_cast<double>(a) / theta;
    d.cminus.push_back(static_cast<Vertex>(std::ceil(static_cast<double>(d.anchor - 3 * K) - shift - 1e-9)));
    d.cplus.push_back(static_cast<Vertex>(std::floor(static_cast<double>(d.anchor + 3 * K) + shift + 1e-9)));
  }
  return d;
}

/// Joint Monte Carlo of the events F_i on B_{CK}.
struct FEventStats {
  Vertex K = 0;
  Vertex C = 0;
  double theta = 0.0;
  double theta_prime = 0.0;
  std::uint64_t n = 0;
  std::vector<std::uint64_t> f_hits;  // index i + C - 1
  std::uint64_t bad_block_hits = 0;   // over all n * (2C-1) K-blocks
  std::uint64_t big_bad_hits = 0;     // B_{CK} theta'-bad

  double p_bad() const { return static_cast<double>(bad_block_hits) / static_cast<double>(n * f_hits.size()); }
  double p_f(Vertex i) const { return static_cast<double>(f_hits[static_cast<std::size_t>(i + C - 1)]) / static_cast<double>(n); }
  double p_f_stderr(Vertex i) const {
    const double p = p_f(i);
    return std::sqrt(p * (1 - p) / static_cast<double>(n));
  }
  /// sum_i P[F_i] / p_bad; the merging inequality wants this below 1/100
  /// once C is large.
  double f_sum_ratio() const {
    double s = 0.0;
    for (auto h : f_hits) s += static_cast<double>(h);
    const double pb = p_bad();
    return pb > 0.0 ? s / static_cast<double>(n) / pb : 0.0;
  }
};

inline FEventStats estimate_f_events(Vertex K, Vertex C, double theta, double theta_prime, const ModelParams& params,
                                     std::uint64_t n, std::uint64_t seed) {
  require_samples(n);
  require_theta(theta);
  require_theta(theta_prime);
  if (!(theta_prime < theta)) throw std::invalid_argument("estimate_f_events: theta_prime must be below theta");
  validate_params(params);
  struct Row {
    std::vector<std::uint8_t> f;
    std::uint32_t bad = 0;
    std::uint8_t big_bad = 0;
  };
  const auto rows = parallel_map<Row>(n, [&](std::size_t k) {
    const auto config = sample_config(big_block(K, C), params, replicate_seed(seed, k));
    const auto reports = block_reports(config, K, C, theta);
    Row r;
    r.big_bad = !is_theta_good(config, BlockSpec{C * K, 0}, theta_prime).good;
    for (const auto& rep : reports) r.bad += !rep.good;
    r.f.resize(reports.size(), 0);
    if (r.big_bad && r.bad > 0) {
      for (Vertex i = -C + 1; i <= C - 1; ++i) r.f[static_cast<std::size_t>(i + C - 1)] = detect_E_i(reports, i);
    }
    return r;
  });
  FEventStats st{K, C, theta, theta_prime, n, std::vector<std::uint64_t>(static_cast<std::size_t>(2 * C - 1), 0), 0, 0};
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.f.size(); ++k) st.f_hits[k] += r.f[k];
    st.bad_block_hits += r.bad;
    st.big_bad_hits += r.big_bad;
  }
  return st;
}

}  // namespace lrperc
