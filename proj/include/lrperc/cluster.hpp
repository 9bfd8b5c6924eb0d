#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lrperc/model.hpp"
#include "lrperc/sampler.hpp"

namespace lrperc {

// Disjoint-set forest with union by size and path halving.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0u); }

  std::uint32_t find(std::uint32_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  std::uint32_t component_size(std::uint32_t a) { return size_[find(a)]; }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

/// Partition of a vertex set into clusters. Components are numbered in order
/// of their smallest vertex, which also serves as their representative.
class ClusterPartition {
 public:
  /// Partition of an interval domain from a finished union-find over it.
  ClusterPartition(const Interval& domain, UnionFind& uf) : interval_(domain) { flatten(uf); }

  /// Partition of an explicit, sorted, duplicate-free vertex list.
  ClusterPartition(std::vector<Vertex> vertices, UnionFind& uf) : vertices_(std::move(vertices)) { flatten(uf); }

  std::size_t domain_size() const { return label_.size(); }
  bool in_domain(Vertex v) const { return local_index(v).has_value(); }
  Vertex vertex_at(std::size_t k) const {
    return interval_ ? interval_->lo + static_cast<Vertex>(k) : vertices_[k];
  }

  std::size_t component_count() const { return comp_size_.size(); }
  std::uint32_t label(Vertex v) const { return label_[checked_index(v)]; }
  std::size_t size_of(Vertex v) const { return comp_size_[label(v)]; }
  Vertex representative(Vertex v) const { return comp_min_[label(v)]; }
  bool connected(Vertex a, Vertex b) const { return label(a) == label(b); }

  std::span<const std::size_t> component_sizes() const { return comp_size_; }
  std::span<const Vertex> representatives() const { return comp_min_; }

  /// Components as sorted vertex lists, ordered by smallest vertex.
  std::vector<std::vector<Vertex>> components() const {
    std::vector<std::vector<Vertex>> out(comp_size_.size());
    for (std::size_t k = 0; k < label_.size(); ++k) out[label_[k]].push_back(vertex_at(k));
    return out;
  }

  std::optional<std::size_t> local_index(Vertex v) const {
    if (interval_) {
      if (!interval_->contains(v)) return std::nullopt;
      return static_cast<std::size_t>(v - interval_->lo);
    }
    auto it = std::lower_bound(vertices_.begin(), vertices_.end(), v);
    if (it == vertices_.end() || *it != v) return std::nullopt;
    return static_cast<std::size_t>(it - vertices_.begin());
  }

 private:
  std::size_t checked_index(Vertex v) const {
    auto k = local_index(v);
    if (!k) throw std::out_of_range("cluster partition: vertex outside domain");
    return *k;
  }

  void flatten(UnionFind& uf) {
    const std::size_t n = uf.size();
    constexpr std::uint32_t kUnset = ~0u;
    std::vector<std::uint32_t> root_label(n, kUnset);
    label_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto r = uf.find(static_cast<std::uint32_t>(k));
      if (root_label[r] == kUnset) {
        root_label[r] = static_cast<std::uint32_t>(comp_size_.size());
        comp_size_.push_back(0);
        comp_min_.push_back(vertex_at(k));
      }
      label_[k] = root_label[r];
      ++comp_size_[label_[k]];
    }
  }

  std::optional<Interval> interval_;
  std::vector<Vertex> vertices_;
  std::vector<std::uint32_t> label_;
  std::vector<std::size_t> comp_size_;
  std::vector<Vertex> comp_min_;
};

struct AnyEdge {
  constexpr bool operator()(const Edge&) const { return true; }
};

/// Clusters in S: union-find over S using exactly the open edges with both
/// endpoints in S that pass `keep`.
template <typename Filter = AnyEdge>
ClusterPartition clusters_in(const Configuration& config, const Interval& S, Filter keep = {}) {
  if (!config.box().contains(S)) throw std::invalid_argument("clusters_in: domain not contained in the sampled box");
  UnionFind uf(static_cast<std::size_t>(S.size()));
  auto local = [&](Vertex v) { return static_cast<std::uint32_t>(v - S.lo); };
  for (Vertex i = S.lo; i + 1 < S.hi; ++i) {
    if (config.nn_is_open(i) && keep(Edge{i, i + 1})) uf.unite(local(i), local(i + 1));
  }
  for (const Edge& e : config.long_edges_from(S.lo, S.hi)) {
    if (e.j < S.hi && keep(e)) uf.unite(local(e.i), local(e.j));
  }
  return ClusterPartition(S, uf);
}

/// Clusters over an explicit vertex set (any order; duplicates ignored).
template <typename Filter = AnyEdge>
ClusterPartition clusters_in(const Configuration& config, std::vector<Vertex> S, Filter keep = {}) {
  std::sort(S.begin(), S.end());
  S.erase(std::unique(S.begin(), S.end()), S.end());
  if (S.empty()) throw std::invalid_argument("clusters_in: empty domain");
  if (!config.box().contains(S.front()) || !config.box().contains(S.back())) {
    throw std::invalid_argument("clusters_in: domain not contained in the sampled box");
  }
  UnionFind uf(S.size());
  auto index = [&](Vertex v) -> std::optional<std::uint32_t> {
    auto it = std::lower_bound(S.begin(), S.end(), v);
    if (it == S.end() || *it != v) return std::nullopt;
    return static_cast<std::uint32_t>(it - S.begin());
  };
  for (std::size_t k = 0; k + 1 < S.size(); ++k) {
    if (S[k + 1] == S[k] + 1 && config.nn_is_open(S[k]) && keep(Edge{S[k], S[k] + 1})) {
      uf.unite(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k + 1));
    }
  }
  for (const Edge& e : config.long_edges_from(S.front(), S.back() + 1)) {
    if (!keep(e)) continue;
    auto a = index(e.i);
    if (!a) continue;
    auto b = index(e.j);
    if (b) uf.unite(*a, *b);
  }
  return ClusterPartition(std::move(S), uf);
}

struct LargestCluster {
  std::size_t size = 0;
  Vertex representative = 0;
};

/// Largest component; ties go to the smallest representative.
inline LargestCluster largest_cluster(const ClusterPartition& partition) {
  if (partition.domain_size() == 0) throw std::invalid_argument("largest_cluster: empty domain");
  LargestCluster best{0, 0};
  const auto sizes = partition.component_sizes();
  const auto reps = partition.representatives();
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (sizes[c] > best.size || (sizes[c] == best.size && reps[c] < best.representative)) {
      best = {sizes[c], reps[c]};
    }
  }
  return best;
}

/// Compressed adjacency of the long edges of a configuration, for local
/// searches that need both endpoints' neighbourhoods.
class AdjacencyIndex {
 public:
  explicit AdjacencyIndex(const Configuration& config) : box_(config.box()) {
    const auto n = static_cast<std::size_t>(box_.size());
    offset_.assign(n + 1, 0);
    const auto longs = config.long_edges();
    for (const Edge& e : longs) {
      ++offset_[local(e.i) + 1];
      ++offset_[local(e.j) + 1];
    }
    for (std::size_t k = 1; k <= n; ++k) offset_[k] += offset_[k - 1];
    neighbours_.resize(offset_[n]);
    std::vector<std::uint32_t> fill(offset_.begin(), offset_.end() - 1);
    for (const Edge& e : longs) {
      neighbours_[fill[local(e.i)]++] = e.j;
      neighbours_[fill[local(e.j)]++] = e.i;
    }
  }

  const Interval& box() const { return box_; }

  std::span<const Vertex> long_neighbours(Vertex v) const {
    const auto k = local(v);
    return {neighbours_.data() + offset_[k], neighbours_.data() + offset_[k + 1]};
  }

 private:
  std::size_t local(Vertex v) const { return static_cast<std::size_t>(v - box_.lo); }

  Interval box_;
  std::vector<std::uint32_t> offset_;
  std::vector<Vertex> neighbours_;
};

inline bool same_edge(const Edge& e, Vertex a, Vertex b) {
  return (e.i == a && e.j == b) || (e.i == b && e.j == a);
}

/// "x is connected to distance R": the cluster of x inside the window
/// [x-R, x+R), built without `exclude`, is joined by an open edge (other than
/// `exclude`) to a vertex outside the window. Equivalently x is connected to
/// the complement of the window, so the probability is the one-arm
/// probability P[0 <-> Z \ B_R] when nothing is excluded.
inline bool connected_to_distance(const Configuration& config, const AdjacencyIndex& adj, Vertex x, Vertex R,
                                  std::optional<Edge> exclude = std::nullopt) {
  if (R < 1) throw std::invalid_argument("connected_to_distance: R must be >= 1");
  const Interval window(x - R, x + R);
  if (!config.box().contains(window)) throw std::invalid_argument("connected_to_distance: window exceeds box");
  auto usable = [&](Vertex a, Vertex b) { return !(exclude && same_edge(*exclude, a, b)); };

  std::vector<std::uint8_t> seen(static_cast<std::size_t>(window.size()), 0);
  std::vector<Vertex> stack{x};
  seen[static_cast<std::size_t>(x - window.lo)] = 1;
  auto visit = [&](Vertex from, Vertex to) -> bool {
    if (!usable(from, to)) return false;
    if (!window.contains(to)) return true;
    auto& s = seen[static_cast<std::size_t>(to - window.lo)];
    if (!s) {
      s = 1;
      stack.push_back(to);
    }
    return false;
  };
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    if (config.nn_is_open(v) && visit(v, v + 1)) return true;
    if (config.nn_is_open(v - 1) && visit(v, v - 1)) return true;
    for (Vertex w : adj.long_neighbours(v)) {
      if (visit(v, w)) return true;
    }
  }
  return false;
}

inline bool connected_to_distance(const Configuration& config, Vertex x, Vertex R,
                                  std::optional<Edge> exclude = std::nullopt) {
  return connected_to_distance(config, AdjacencyIndex(config), x, R, exclude);
}

}  // namespace lrperc
