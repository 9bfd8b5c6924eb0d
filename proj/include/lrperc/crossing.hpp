#pragma once

// K-crossed 3K-blocks, bridges and the events used to compare p̄(K) with
// the one-arm probability.
//
// B^i_{3K} = [3K(i-1), 3K(i+1)). It is K-crossed when some x < 3Ki - 3K is
// joined to some y >= 3Ki + 3K by open edges of length at most K. Paths are
// confined to a window; the default [3Ki - 5K, 3Ki + 5K) can only
// undercount crossings, so p̄ estimates err upwards.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrperc/cluster.hpp"
#include "lrperc/estimator.hpp"
#include "lrperc/model.hpp"
#include "lrperc/percolation.hpp"
#include "lrperc/sampler.hpp"

namespace lrperc {

struct CrossSpec {
  Vertex K = 1;
  Vertex i = 0;

  Vertex left_edge() const { return 3 * K * i - 3 * K; }   // witnesses x < left_edge
  Vertex right_edge() const { return 3 * K * i + 3 * K; }  // witnesses y >= right_edge
  Interval default_window() const { return Interval(3 * K * i - 5 * K, 3 * K * i + 5 * K); }
};

struct ShortEdges {
  Vertex K;
  bool operator()(const Edge& e) const { return e.length() <= K; }
};

inline bool is_k_crossed(const Configuration& config, const CrossSpec& spec, const Interval& window) {
  if (spec.K < 1) throw std::invalid_argument("is_k_crossed: K must be >= 1");
  if (!config.box().contains(window)) throw std::invalid_argument("is_k_crossed: window exceeds box");
  if (!window.contains(spec.default_window())) throw std::invalid_argument("is_k_crossed: window too small");
  const auto part = clusters_in(config, window, ShortEdges{spec.K});
  std::vector<std::uint8_t> left(part.component_count(), 0);
  for (Vertex x = window.lo; x < spec.left_edge(); ++x) left[part.label(x)] = 1;
  for (Vertex y = spec.right_edge(); y < window.hi; ++y) {
    if (left[part.label(y)]) return true;
  }
  return false;
}

inline bool is_k_crossed(const Configuration& config, const CrossSpec& spec) {
  return is_k_crossed(config, spec, spec.default_window());
}

/// p̄(K) = 1 - P[B_{3K} is K-crossed], window [-hw, hw).
inline EstimatorResult estimate_pbar(Vertex K, const ModelParams& params, Vertex window_halfwidth, std::uint64_t n,
                                     std::uint64_t seed) {
  if (K < 1) throw std::invalid_argument("estimate_pbar: K must be >= 1");
  if (window_halfwidth < 5 * K) throw std::invalid_argument("estimate_pbar: window_halfwidth must be >= 5K");
  require_samples(n);
  validate_params(params);
  const Interval box = centered_box(window_halfwidth);
  const auto crossed = parallel_map<std::uint8_t>(n, [&](std::size_t k) {
    return static_cast<std::uint8_t>(is_k_crossed(sample_config(box, params, replicate_seed(seed, k), K), {K, 0}, box));
  });
  std::uint64_t miss = 0;
  for (auto c : crossed) miss += !c;
  auto out = proportion(miss, n, seed);
  out.metadata = {{"observable", "pbar"}, {"K", std::to_string(K)}, {"window_halfwidth", std::to_string(window_halfwidth)}};
  return out;
}

struct BridgeVerdict {
  Edge edge;
  Vertex R = 0;
  bool is_bridge = false;
  bool length_in_range = false;  // K < y - x <= CK
};

inline BridgeVerdict is_bridge(const Configuration& config, const AdjacencyIndex& adj, Edge edge, Vertex R, Vertex K,
                               Vertex C) {
  if (edge.i > edge.j) std::swap(edge.i, edge.j);
  if (edge.i == edge.j) throw std::invalid_argument("is_bridge: self-edge");
  if (R < 1) throw std::invalid_argument("is_bridge: R must be >= 1");
  if (!config.box().contains(Interval(edge.i - R, edge.j + R))) throw std::invalid_argument("is_bridge: insufficient margin");
  BridgeVerdict v{edge, R, false, edge.length() > K && edge.length() <= C * K};
  v.is_bridge = config.is_open(edge.i, edge.j) && connected_to_distance(config, adj, edge.i, R, edge) &&
                connected_to_distance(config, adj, edge.j, R, edge);
  return v;
}

inline BridgeVerdict is_bridge(const Configuration& config, Edge edge, Vertex R, Vertex K, Vertex C) {
  return is_bridge(config, AdjacencyIndex(config), edge, R, K, C);
}

/// Indices i divisible by 3 with B^i_{3K} inside B_{CK}.
inline std::vector<Vertex> unbridged_candidates(Vertex K, Vertex C) {
  std::vector<Vertex> out;
  for (Vertex i = -C; i <= C; ++i) {
    if (i % 3 == 0 && 3 * K * (i - 1) >= -C * K && 3 * K * (i + 1) <= C * K) out.push_back(i);
  }
  return out;
}

/// Candidate blocks not overlapped by any bridge of length in (K, CK]. A
/// bridge {x, y} covers block i when x < 3K(i+1) and y >= 3K(i-1).
inline std::vector<Vertex> unbridged_blocks(const Configuration& config, Vertex K, Vertex C, Vertex R) {
  if (K < 1 || C < 1 || R < 1) throw std::invalid_argument("unbridged_blocks: K, C and R must be >= 1");
  const Vertex margin = R + C * K;
  if (!config.box().contains(Interval(-C * K - margin, C * K + margin))) {
    throw std::invalid_argument("unbridged_blocks: box must contain B_CK with margin R + CK");
  }
  auto cand = unbridged_candidates(K, C);
  if (cand.empty()) return cand;
  std::vector<std::uint8_t> covered(cand.size(), 0);
  const AdjacencyIndex adj(config);
  const Vertex lo = 3 * K * (cand.front() - 1), hi = 3 * K * (cand.back() + 1);
  for (const Edge& e : config.long_edges_from(lo - C * K, hi)) {
    if (e.length() <= K || e.length() > C * K || e.j < lo) continue;
    bool useful = false;
    for (std::size_t k = 0; k < cand.size(); ++k) {
      if (!covered[k] && e.i < 3 * K * (cand[k] + 1) && e.j >= 3 * K * (cand[k] - 1)) useful = true;
    }
    if (!useful || !is_bridge(config, adj, e, R, K, C).is_bridge) continue;
    for (std::size_t k = 0; k < cand.size(); ++k) {
      if (e.i < 3 * K * (cand[k] + 1) && e.j >= 3 * K * (cand[k] - 1)) covered[k] = 1;
    }
  }
  std::vector<Vertex> out;
  for (std::size_t k = 0; k < cand.size(); ++k) {
    if (!covered[k]) out.push_back(cand[k]);
  }
  return out;
}

/// Box used for the unbridged-block count: B_CK plus the required margin.
inline Interval unbridged_box(Vertex K, Vertex C, Vertex R) { return centered_box(2 * C * K + R); }

/// Mean number of unbridged blocks, with the lower bound (C/3)(1/2)C^{-beta theta^2}.
struct UnbridgedStats {
  EstimatorResult count;
  double bound = 0.0;
  std::size_t candidates = 0;
};

inline UnbridgedStats estimate_unbridged(Vertex K, Vertex C, Vertex R, double theta, const ModelParams& params,
                                         std::uint64_t n, std::uint64_t seed) {
  require_samples(n);
  validate_params(params);
  const Interval box = unbridged_box(K, C, R);
  const auto counts = parallel_map<double>(n, [&](std::size_t k) {
    const auto config = sample_config(box, params, replicate_seed(seed, k));
    return static_cast<double>(unbridged_blocks(config, K, C, R).size());
  });
  MeanAccumulator acc;
  for (double c : counts) acc.add(c);
  UnbridgedStats st;
  st.count = from_accumulator(acc, seed);
  st.bound = static_cast<double>(C) / 3.0 * 0.5 * std::pow(static_cast<double>(C), -params.beta * theta * theta);
  st.candidates = unbridged_candidates(K, C).size();
  return st;
}

struct ChooseRResult {
  std::optional<Vertex> R;
  double exit_prob = 0.0;  // at the returned R, or at the last R tried
  double exit_stderr = 0.0;
  double lhs = 0.0;  // (p + 3 se)^2 + (2R)^2 exp(-beta (K - 2R))
  double theta = 0.0;
};

/// P[0 <-> Z \ B_R]^2 + |B_R|^2 e^{-beta (K - 2R)} for a given one-arm value.
inline double one_arm_budget(double exit_prob, Vertex R, Vertex K, double beta) {
  const double side = static_cast<double>(2 * R);
  return exit_prob * exit_prob + side * side * std::exp(-beta * static_cast<double>(K - 2 * R));
}

/// Smallest R <= K/2 with (p̂_R + 3 se)^2 + (2R)^2 e^{-beta (K - 2R)} <= theta^2,
/// where p̂_R estimates P[0 <-> Z \ B_R].
inline ChooseRResult choose_R(const ModelParams& params, double theta, Vertex K, std::uint64_t n, std::uint64_t seed) {
  if (K < 2) throw std::invalid_argument("choose_R: K must be >= 2");
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("choose_R: theta must lie in (0,1)");
  validate_params(params);
  ChooseRResult out;
  out.theta = theta;
  for (Vertex R = 1; R <= K / 2; ++R) {
    const double local = one_arm_budget(0.0, R, K, params.beta);
    if (local > theta * theta) break;  // only grows with R
    const auto est = estimate_exit_probability(params, R, n, derive_key(seed, {static_cast<std::uint64_t>(R)}));
    const double hi = std::min(1.0, est.mean + 3.0 * est.std_error);
    out.exit_prob = est.mean;
    out.exit_stderr = est.std_error;
    out.lhs = one_arm_budget(hi, R, K, params.beta);
    if (out.lhs <= theta * theta) {
      out.R = R;
      return out;
    }
  }
  return out;
}

struct Lemma2Report {
  Vertex K = 0;
  Vertex C = 0;
  Vertex R = 0;
  double theta = 0.0;
  EstimatorResult pbar_K;
  EstimatorResult pbar_CK;
  double bound = 0.0;  // (C^{1 - beta theta^2} / 9e) min(p̄(K), 1/C)
  double ratio = 0.0;
  double ratio_stderr = 0.0;
  UnbridgedStats unbridged;
};

/// Compares p̄(CK) with (C^{1-beta theta^2}/9e) min{p̄(K), 1/C}. Nothing is
/// asserted; the inequality is only claimed for C, K beyond some threshold.
inline Lemma2Report check_lemma2(Vertex K, Vertex C, const ModelParams& params, double theta, Vertex R,
                                 std::uint64_t n, std::uint64_t seed) {
  validate_params(params);
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("check_lemma2: theta must lie in (0,1)");
  if (!(params.beta * theta * theta < 1.0)) throw std::invalid_argument("check_lemma2: requires beta theta^2 < 1");
  if (C < 2) throw std::invalid_argument("check_lemma2: C must be >= 2");
  Lemma2Report r;
  r.K = K;
  r.C = C;
  r.R = R;
  r.theta = theta;
  r.pbar_K = estimate_pbar(K, params, 5 * K, n, derive_key(seed, {1}));
  r.pbar_CK = estimate_pbar(C * K, params, 5 * C * K, n, derive_key(seed, {2}));
  const double pref = std::pow(static_cast<double>(C), 1.0 - params.beta * theta * theta) / (9.0 * std::numbers::e);
  const double inv_c = 1.0 / static_cast<double>(C);
  const bool k_side = r.pbar_K.mean < inv_c;
  r.bound = pref * std::min(r.pbar_K.mean, inv_c);
  if (r.bound > 0.0) {
    r.ratio = r.pbar_CK.mean / r.bound;
    const double rel_num = r.pbar_CK.mean > 0.0 ? r.pbar_CK.std_error / r.pbar_CK.mean : 0.0;
    const double rel_den = k_side ? r.pbar_K.std_error / r.pbar_K.mean : 0.0;
    r.ratio_stderr = r.ratio * std::hypot(rel_num, rel_den);
  } else {
    r.ratio = r.pbar_CK.mean > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  r.unbridged = estimate_unbridged(K, C, R, theta, params, n, derive_key(seed, {3}));
  return r;
}

/// A(K): some x in B_{3K} is joined to some y outside B_{9K}.
inline bool event_A(const ClusterPartition& part, Vertex K) {
  std::vector<std::uint8_t> inner(part.component_count(), 0);
  for (Vertex x = -3 * K; x < 3 * K; ++x) inner[part.label(x)] = 1;
  for (std::size_t k = 0; k < part.domain_size(); ++k) {
    const Vertex v = part.vertex_at(k);
    if ((v < -9 * K || v >= 9 * K) && inner[part.label(v)]) return true;
  }
  return false;
}

/// B(K): every edge of length > K with an endpoint in B_{9K} is closed.
inline bool event_B(const Configuration& config, Vertex K) {
  for (const Edge& e : config.long_edges()) {
    if (e.length() > K && ((e.i >= -9 * K && e.i < 9 * K) || (e.j >= -9 * K && e.j < 9 * K))) return false;
  }
  return true;
}

/// Exact P[B(K)] in infinite volume.
inline double prob_event_B(Vertex K, const ModelParams& params) {
  validate_params(params);
  const Vertex w = 18 * K;
  double sum = 0.0;
  for (Vertex d = K + 1; d < w; ++d) sum += static_cast<double>(w - d) * coupling(d, params.s);
  for (Vertex x = -9 * K; x < 9 * K; ++x) {
    sum += zeta_tail(std::max(x + 9 * K + 1, K + 1), params.s);
    sum += zeta_tail(std::max(9 * K - x, K + 1), params.s);
  }
  return std::exp(-params.beta * sum);
}

/// Drops every edge of length > K touching B_{9K}: the law of the result is
/// the law conditioned on B(K).
inline Configuration condition_on_B(const Configuration& config, Vertex K) {
  std::vector<Edge> keep;
  config.for_each_open_edge([&](const Edge& e) {
    const bool touches = (e.i >= -9 * K && e.i < 9 * K) || (e.j >= -9 * K && e.j < 9 * K);
    if (e.length() <= K || !touches) keep.push_back(e);
  });
  return Configuration::from_edges(config.box(), std::move(keep), config.seed(), config.params());
}

struct TheoremIIEvents {
  bool A = false;
  bool B = false;
  bool left_crossed = false;   // B^{-2}_{3K}
  bool right_crossed = false;  // B^{2}_{3K}
  bool center_crossed = false;

  // B and neither flank crossed must force not-A.
  bool implication_holds() const { return !(B && !left_crossed && !right_crossed && A); }
};

inline TheoremIIEvents theorem_ii_events(const Configuration& config, Vertex K) {
  if (!config.box().contains(centered_box(12 * K))) throw std::invalid_argument("theorem_ii_events: box must contain B_12K");
  TheoremIIEvents ev;
  ev.A = event_A(clusters_in(config, config.box()), K);
  ev.B = event_B(config, K);
  ev.left_crossed = is_k_crossed(config, {K, -2});
  ev.right_crossed = is_k_crossed(config, {K, 2});
  ev.center_crossed = is_k_crossed(config, {K, 0});
  return ev;
}

struct TheoremIIReport {
  Vertex K = 0;
  std::uint64_t n = 0;
  EstimatorResult p_A;
  EstimatorResult p_B;      // empirical, on the unconditioned sample
  double p_B_exact = 0.0;   // infinite volume
  EstimatorResult pbar;     // central 3K-block, same sample
  double lhs = 0.0;         // P[B] p̄^2 with the exact P[B]
  double rhs = 0.0;         // 1 - P̂[A]
  double joint_stderr = 0.0;
  bool inequality_holds = false;
  std::uint64_t violations = 0;              // deterministic implication, both samples
  std::uint64_t conditioned_antecedents = 0; // samples where the implication had content
};

/// Events A, B and the crossings on a common sample of [-12K, 12K), plus a
/// second sample conditioned on B so the deterministic implication is tested
/// on configurations where it is not vacuous.
inline TheoremIIReport check_theorem_ii_events(Vertex K, const ModelParams& params, std::uint64_t n, std::uint64_t seed) {
  if (K < 1) throw std::invalid_argument("check_theorem_ii_events: K must be >= 1");
  require_samples(n);
  validate_params(params);
  const Interval box = centered_box(12 * K);
  struct Row {
    TheoremIIEvents plain, cond;
  };
  const auto rows = parallel_map<Row>(n, [&](std::size_t k) {
    const auto config = sample_config(box, params, replicate_seed(seed, k));
    return Row{theorem_ii_events(config, K), theorem_ii_events(condition_on_B(config, K), K)};
  });
  std::uint64_t a = 0, b = 0, miss = 0, bad = 0, content = 0;
  for (const auto& r : rows) {
    a += r.plain.A;
    b += r.plain.B;
    miss += !r.plain.center_crossed;
    bad += !r.plain.implication_holds() + !r.cond.implication_holds();
    content += !r.cond.left_crossed && !r.cond.right_crossed;
  }
  TheoremIIReport rep;
  rep.K = K;
  rep.n = n;
  rep.p_A = proportion(a, n, seed);
  rep.p_B = proportion(b, n, seed);
  rep.p_B_exact = prob_event_B(K, params);
  rep.pbar = proportion(miss, n, seed);
  rep.lhs = rep.p_B_exact * rep.pbar.mean * rep.pbar.mean;
  rep.rhs = 1.0 - rep.p_A.mean;
  rep.joint_stderr = std::hypot(2.0 * rep.p_B_exact * rep.pbar.mean * rep.pbar.std_error, rep.p_A.std_error);
  rep.inequality_holds = rep.lhs <= rep.rhs + 3.0 * rep.joint_stderr;
  rep.violations = bad;
  rep.conditioned_antecedents = content;
  return rep;
}

}  // namespace lrperc
