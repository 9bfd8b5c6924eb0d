#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lrperc/model.hpp"
#include "lrperc/rng.hpp"

namespace lrperc {

struct Edge {
  Vertex i = 0;
  Vertex j = 0;

  Vertex length() const { return j - i; }
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// A set of open edges on a finite box. Nearest-neighbour edges are stored as
/// one byte per edge (index k <-> {lo+k, lo+k+1}); longer edges as a sorted,
/// duplicate-free list with i < j. Immutable once built.
class Configuration {
 public:
  Configuration() = default;

  /// Builds from an arbitrary edge list (any order, either orientation).
  /// Throws if an edge is degenerate or leaves the box; duplicates collapse.
  static Configuration from_edges(const Interval& box, std::vector<Edge> edges, std::uint64_t seed = 0,
                                  const ModelParams& params = {}) {
    Configuration c(box, seed, params);
    std::vector<Edge> longs;
    for (Edge e : edges) {
      if (e.i > e.j) std::swap(e.i, e.j);
      if (e.i == e.j) throw std::invalid_argument("configuration: self-edge");
      if (!box.contains(e.i) || !box.contains(e.j)) throw std::invalid_argument("configuration: edge outside box");
      if (e.length() == 1) {
        c.nn_open_[static_cast<std::size_t>(e.i - box.lo)] = 1;
      } else {
        longs.push_back(e);
      }
    }
    std::sort(longs.begin(), longs.end());
    longs.erase(std::unique(longs.begin(), longs.end()), longs.end());
    c.long_edges_ = std::move(longs);
    return c;
  }

  const Interval& box() const { return box_; }
  std::uint64_t seed() const { return seed_; }
  const ModelParams& params() const { return params_; }
  std::span<const std::uint8_t> nn_open() const { return nn_open_; }
  std::span<const Edge> long_edges() const { return long_edges_; }

  bool nn_is_open(Vertex i) const {
    return box_.contains(i) && box_.contains(i + 1) && nn_open_[static_cast<std::size_t>(i - box_.lo)] != 0;
  }

  bool is_open(Vertex a, Vertex b) const {
    if (a > b) std::swap(a, b);
    if (a == b || !box_.contains(a) || !box_.contains(b)) return false;
    if (b - a == 1) return nn_is_open(a);
    return std::binary_search(long_edges_.begin(), long_edges_.end(), Edge{a, b});
  }

  /// Long edges whose left endpoint lies in [lo, hi).
  std::span<const Edge> long_edges_from(Vertex lo, Vertex hi) const {
    auto first = std::lower_bound(long_edges_.begin(), long_edges_.end(), Edge{lo, std::numeric_limits<Vertex>::min()});
    auto last = std::lower_bound(first, long_edges_.end(), Edge{hi, std::numeric_limits<Vertex>::min()});
    return {first, last};
  }

  std::size_t nn_open_count() const {
    return static_cast<std::size_t>(std::count(nn_open_.begin(), nn_open_.end(), std::uint8_t{1}));
  }
  std::size_t open_count() const { return nn_open_count() + long_edges_.size(); }

  /// Every open edge in lexicographic (i, j) order.
  std::vector<Edge> open_edges() const {
    std::vector<Edge> out;
    out.reserve(open_count());
    std::size_t k = 0;
    for (Vertex i = box_.lo; i + 1 < box_.hi; ++i) {
      if (nn_open_[static_cast<std::size_t>(i - box_.lo)]) out.push_back({i, i + 1});
      while (k < long_edges_.size() && long_edges_[k].i == i) out.push_back(long_edges_[k++]);
    }
    return out;
  }

  template <typename F>
  void for_each_open_edge(F&& f) const {
    for (std::size_t k = 0; k < nn_open_.size(); ++k) {
      if (nn_open_[k]) f(Edge{box_.lo + static_cast<Vertex>(k), box_.lo + static_cast<Vertex>(k) + 1});
    }
    for (const Edge& e : long_edges_) f(e);
  }

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.box_ == b.box_ && a.seed_ == b.seed_ && a.nn_open_ == b.nn_open_ && a.long_edges_ == b.long_edges_;
  }

 private:
  friend Configuration sample_config(const Interval&, const ModelParams&, std::uint64_t, Vertex);
  friend std::pair<Configuration, Configuration> sample_config_coupled(const Interval&, const ModelParams&,
                                                                       const ModelParams&, std::uint64_t, Vertex);

  Configuration(const Interval& box, std::uint64_t seed, const ModelParams& params)
      : box_(box),
        seed_(seed),
        params_(params),
        nn_open_(static_cast<std::size_t>(box.size() - 1), 0) {}

  Interval box_;
  std::uint64_t seed_ = 0;
  ModelParams params_;
  std::vector<std::uint8_t> nn_open_;
  std::vector<Edge> long_edges_;
};

namespace detail {

// Offsets of the open trials among `count` independent trials that each
// succeed with probability 1 - exp(-weight). Successive gaps are geometric,
// drawn as floor(Exp(1) / weight); cost is O(1 + number of successes).
template <typename F>
void bernoulli_positions(CounterRng& rng, double weight, Vertex count, F&& on_open) {
  if (count <= 0 || !(weight > 0.0)) return;
  Vertex pos = 0;
  while (true) {
    const double gap = rng.exponential() / weight;
    if (gap >= static_cast<double>(count - pos)) return;
    pos += static_cast<Vertex>(gap);
    on_open(pos);
    if (++pos >= count) return;
  }
}

// Stable counting sort of long edges by left endpoint. Input generated in
// increasing length order comes out lexicographically sorted.
inline std::vector<Edge> sort_by_left(const Interval& box, const std::vector<Edge>& edges) {
  std::vector<std::uint32_t> start(static_cast<std::size_t>(box.size()) + 1, 0);
  for (const Edge& e : edges) ++start[static_cast<std::size_t>(e.i - box.lo) + 1];
  for (std::size_t k = 1; k < start.size(); ++k) start[k] += start[k - 1];
  std::vector<Edge> out(edges.size());
  for (const Edge& e : edges) out[start[static_cast<std::size_t>(e.i - box.lo)]++] = e;
  return out;
}

}  // namespace detail

inline constexpr Vertex kNoLengthLimit = std::numeric_limits<Vertex>::max();

/// Independent long-range Bernoulli configuration on `box`.
///
/// Each distance d has its own stream keyed by (seed, d); the open edges at
/// distance d are found by geometric skipping over the |box| - d candidate
/// positions, which realizes Binomial(|box| - d, p_d) many edges placed
/// uniformly without replacement. Expected cost O(|box| + open edges).
///
/// `max_length` restricts sampling to edges of length <= max_length. Events
/// that only look at such edges have the same law either way.
inline Configuration sample_config(const Interval& box, const ModelParams& params, std::uint64_t seed,
                                   Vertex max_length = kNoLengthLimit) {
  const Vertex n = box.size();
  if (n < 2) throw std::invalid_argument("sample_config: box must contain at least 2 sites");
  validate_params(params);
  Configuration c(box, seed, params);

  CounterRng nn_rng(seed, {1});
  detail::bernoulli_positions(nn_rng, params.lambda, n - 1, [&](Vertex k) { c.nn_open_[static_cast<std::size_t>(k)] = 1; });

  std::vector<Edge> longs;
  const Vertex dmax = std::min(n - 1, max_length);
  for (Vertex d = 2; d <= dmax; ++d) {
    CounterRng rng(seed, {static_cast<std::uint64_t>(d)});
    detail::bernoulli_positions(rng, params.beta * coupling(d, params.s), n - d,
                                [&](Vertex k) { longs.push_back({box.lo + k, box.lo + k + d}); });
  }
  c.long_edges_ = detail::sort_by_left(box, longs);
  return c;
}

inline double expected_edge_count(const Interval& box, const ModelParams& params) {
  const Vertex n = box.size();
  if (n < 2) throw std::invalid_argument("expected_edge_count: box must contain at least 2 sites");
  double total = static_cast<double>(n - 1) * one_minus_exp(params.lambda);
  for (Vertex d = 2; d < n; ++d) total += static_cast<double>(n - d) * edge_prob_at_distance(d, params);
  return total;
}

/// Monotone coupling of two configurations. Every candidate edge {i, j} with
/// j - i <= max_dist gets one uniform from the stream (seed, i, j) and is open
/// in a configuration iff the uniform is below that configuration's edge
/// probability, so open(lo) is a subset of open(hi). O(|box| * max_dist);
/// test-scale only. Edges longer than max_dist are never opened.
inline std::pair<Configuration, Configuration> sample_config_coupled(const Interval& box, const ModelParams& lo,
                                                                     const ModelParams& hi, std::uint64_t seed,
                                                                     Vertex max_dist) {
  validate_params(lo);
  validate_params(hi);
  if (lo.beta > hi.beta || lo.lambda > hi.lambda) {
    throw std::invalid_argument("sample_config_coupled: require lo.beta <= hi.beta and lo.lambda <= hi.lambda");
  }
  if (lo.s != hi.s) throw std::invalid_argument("sample_config_coupled: exponents must agree");
  if (box.size() < 2) throw std::invalid_argument("sample_config_coupled: box must contain at least 2 sites");
  if (max_dist < 1) throw std::invalid_argument("sample_config_coupled: max_dist must be >= 1");

  Configuration a(box, seed, lo);
  Configuration b(box, seed, hi);
  std::vector<double> p_lo(static_cast<std::size_t>(max_dist) + 1), p_hi(p_lo.size());
  for (Vertex d = 1; d <= max_dist; ++d) {
    p_lo[static_cast<std::size_t>(d)] = edge_prob_at_distance(d, lo);
    p_hi[static_cast<std::size_t>(d)] = edge_prob_at_distance(d, hi);
  }
  for (Vertex i = box.lo; i < box.hi; ++i) {
    const Vertex jmax = std::min(box.hi - 1, i + max_dist);
    for (Vertex j = i + 1; j <= jmax; ++j) {
      const double u = CounterRng(seed, {as_coord(i), as_coord(j)}).uniform();
      const auto d = static_cast<std::size_t>(j - i);
      if (d == 1) {
        const auto k = static_cast<std::size_t>(i - box.lo);
        a.nn_open_[k] = u < p_lo[1];
        b.nn_open_[k] = u < p_hi[1];
      } else {
        if (u < p_lo[d]) a.long_edges_.push_back({i, j});
        if (u < p_hi[d]) b.long_edges_.push_back({i, j});
      }
    }
  }
  return {std::move(a), std::move(b)};
}

}  // namespace lrperc
