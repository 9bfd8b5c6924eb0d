#pragma once

// Random-cluster (FK) measures and Potts spins on a box, coupled through
// Swendsen-Wang dynamics, plus an exact enumeration of the FK law on small
// edge sets for any q > 0.
//
// Wired boundary conditions use a ghost vertex: every outside vertex is
// merged into one, and the parallel edges x--y (y outside) collapse to a
// single ghost bond of probability 1 - exp(-sum_y w_xy). The ghost carries
// colour 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrperc/cluster.hpp"
#include "lrperc/estimator.hpp"
#include "lrperc/model.hpp"
#include "lrperc/percolation.hpp"
#include "lrperc/rng.hpp"
#include "lrperc/sampler.hpp"

namespace lrperc {

struct BoundaryCondition {
  enum class Mode { free, wired, partition };
  Mode mode = Mode::free;
  // Classes of boundary vertices wired together. Wired is one class, free is
  // none (every vertex its own class).
  std::vector<std::vector<Vertex>> classes;

  static BoundaryCondition free_bc() { return {}; }
  static BoundaryCondition wired_bc(std::vector<Vertex> boundary = {}) {
    BoundaryCondition bc{Mode::wired, {}};
    if (!boundary.empty()) bc.classes.push_back(std::move(boundary));
    return bc;
  }
  static BoundaryCondition partition_bc(std::vector<std::vector<Vertex>> classes) {
    return {Mode::partition, std::move(classes)};
  }
};

inline std::string to_string(BoundaryCondition::Mode m) {
  switch (m) {
    case BoundaryCondition::Mode::free:
      return "free";
    case BoundaryCondition::Mode::wired:
      return "wired";
    default:
      return "partition";
  }
}

inline int require_integer_q(double q, int minimum) {
  if (!(q >= minimum) || q != std::floor(q) || q > 255) {
    throw std::invalid_argument("q must be an integer >= " + std::to_string(minimum) + " for spin dynamics");
  }
  return static_cast<int>(q);
}

/// Spins are stored 0-based; colour c in {1..q} is spins[x] == c - 1.
struct PottsState {
  Interval box;
  std::vector<std::uint8_t> spins;
  int q = 2;
  BoundaryCondition bc;
  std::vector<double> ghost_coupling;  // wired only

  int color(Vertex x) const { return spins[static_cast<std::size_t>(x - box.lo)] + 1; }
};

/// All spins start at colour 1.
inline PottsState make_potts_state(const Interval& box, const ModelParams& params, BoundaryCondition bc) {
  validate_params(params);
  if (bc.mode == BoundaryCondition::Mode::partition) {
    throw std::invalid_argument("spin dynamics support free and wired boundary conditions only");
  }
  PottsState st;
  st.box = box;
  st.q = require_integer_q(params.q, 1);
  st.spins.assign(static_cast<std::size_t>(box.size()), 0);
  st.bc = std::move(bc);
  if (st.bc.mode == BoundaryCondition::Mode::wired) st.ghost_coupling = exterior_weights(box, params);
  return st;
}

/// Bond layer of one SW step: open bonds among equal-colour pairs plus the
/// ghost bonds (sites of colour 1 only).
struct FkLayer {
  Configuration config;
  std::vector<std::uint8_t> ghost;  // ghost[x - lo] = bond x--ghost open
};

namespace detail {

// Calls on_bond(a, b) for every open bond; b == box.hi stands for the ghost.
// Long bonds are proposed by geometric skipping as if every pair were
// eligible and kept only when the colours agree.
template <typename F>
void sw_bonds(const PottsState& st, const ModelParams& params, CounterRng& rng, F&& on_bond) {
  const Vertex n = st.box.size();
  const auto& s = st.spins;
  auto try_distance = [&](Vertex d) {
    bernoulli_positions(rng, edge_weight(d, params), n - d, [&](Vertex k) {
      if (s[static_cast<std::size_t>(k)] == s[static_cast<std::size_t>(k + d)]) on_bond(st.box.lo + k, st.box.lo + k + d);
    });
  };
  for (Vertex d = 1; d < n; ++d) try_distance(d);
  if (st.bc.mode == BoundaryCondition::Mode::wired) {
    for (Vertex k = 0; k < n; ++k) {
      if (s[static_cast<std::size_t>(k)] == 0 && rng.uniform() < one_minus_exp(st.ghost_coupling[static_cast<std::size_t>(k)])) {
        on_bond(st.box.lo + k, st.box.hi);
      }
    }
  }
}

}  // namespace detail

inline FkLayer fk_from_spins(const PottsState& st, const ModelParams& params, CounterRng& rng) {
  std::vector<Edge> edges;
  std::vector<std::uint8_t> ghost(st.spins.size(), 0);
  detail::sw_bonds(st, params, rng, [&](Vertex a, Vertex b) {
    if (b == st.box.hi) {
      ghost[static_cast<std::size_t>(a - st.box.lo)] = 1;
    } else {
      edges.push_back({a, b});
    }
  });
  return {Configuration::from_edges(st.box, std::move(edges), rng.key(), params), std::move(ghost)};
}

struct SweepInfo {
  bool origin_to_ghost = false;  // in the bond layer of this sweep
};

/// One Swendsen-Wang step in place. `probe` (if inside the box) reports
/// whether it was joined to the ghost in the bond layer.
inline SweepInfo sw_sweep(PottsState& st, const ModelParams& params, CounterRng& rng, Vertex probe = 0) {
  require_integer_q(params.q, 1);
  if (params.q != st.q) throw std::invalid_argument("sw_sweep: params.q differs from the state");
  const auto n = static_cast<std::uint32_t>(st.box.size());
  UnionFind uf(n + 1);  // n is the ghost
  detail::sw_bonds(st, params, rng, [&](Vertex a, Vertex b) {
    uf.unite(static_cast<std::uint32_t>(a - st.box.lo), static_cast<std::uint32_t>(b - st.box.lo));
  });
  SweepInfo info;
  const std::uint32_t ghost = uf.find(n);
  if (st.box.contains(probe)) info.origin_to_ghost = uf.find(static_cast<std::uint32_t>(probe - st.box.lo)) == ghost;
  std::vector<std::int16_t> newc(n + 1, -1);
  newc[ghost] = 0;
  for (std::uint32_t k = 0; k < n; ++k) {
    const auto r = uf.find(k);
    if (newc[r] < 0) newc[r] = static_cast<std::int16_t>(rng.below(static_cast<std::uint64_t>(st.q)));
    st.spins[k] = static_cast<std::uint8_t>(newc[r]);
  }
  return info;
}

inline PottsState sw_sweep(const PottsState& st, const ModelParams& params, CounterRng&& rng) {
  PottsState out = st;
  sw_sweep(out, params, rng);
  return out;
}

/// Exact FK law on a small edge set: weight of omega proportional to
/// q^{k(omega^xi)} prod p_e^{omega_e} (1 - p_e)^{1 - omega_e}, where
/// k counts components after identifying each boundary class. Configuration
/// m has edge e open iff bit e of m is set.
struct FkWeightTable {
  std::vector<Edge> edges;
  std::vector<double> p;
  double q = 1.0;
  BoundaryCondition bc;
  std::vector<double> weights;

  double prob_open(std::size_t e) const {
    double s = 0.0;
    for (std::size_t m = 0; m < weights.size(); ++m) {
      if (m >> e & 1) s += weights[m];
    }
    return s;
  }
};

inline constexpr std::size_t kMaxEnumerationEdges = 20;

inline FkWeightTable exact_fk_distribution(const std::vector<Edge>& edges, const std::vector<double>& p, double q,
                                           const BoundaryCondition& bc) {
  if (edges.size() > kMaxEnumerationEdges) throw std::invalid_argument("exact_fk_distribution: too many edges");
  if (p.size() != edges.size()) throw std::invalid_argument("exact_fk_distribution: one probability per edge");
  if (!(q > 0.0) || !std::isfinite(q)) throw std::invalid_argument("exact_fk_distribution: q must be positive");
  for (double pe : p) {
    if (!(pe >= 0.0 && pe <= 1.0)) throw std::invalid_argument("exact_fk_distribution: probabilities must lie in [0,1]");
  }
  std::vector<Vertex> verts;
  for (const Edge& e : edges) {
    if (e.i == e.j) throw std::invalid_argument("exact_fk_distribution: self-edge");
    verts.push_back(e.i);
    verts.push_back(e.j);
  }
  if (bc.mode != BoundaryCondition::Mode::free) {
    for (const auto& cls : bc.classes) verts.insert(verts.end(), cls.begin(), cls.end());
  }
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  auto idx = [&](Vertex v) {
    return static_cast<std::uint32_t>(std::lower_bound(verts.begin(), verts.end(), v) - verts.begin());
  };

  FkWeightTable t{edges, p, q, bc, std::vector<double>(std::size_t{1} << edges.size(), 0.0)};
  double total = 0.0;
  for (std::size_t m = 0; m < t.weights.size(); ++m) {
    UnionFind uf(static_cast<std::uint32_t>(verts.size()));
    std::size_t comps = verts.size();
    if (bc.mode != BoundaryCondition::Mode::free) {
      for (const auto& cls : bc.classes) {
        for (std::size_t k = 1; k < cls.size(); ++k) comps -= uf.unite(idx(cls[0]), idx(cls[k]));
      }
    }
    double w = 1.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (m >> e & 1) {
        w *= p[e];
        comps -= uf.unite(idx(edges[e].i), idx(edges[e].j));
      } else {
        w *= 1.0 - p[e];
      }
    }
    w *= std::pow(q, static_cast<double>(comps));
    t.weights[m] = w;
    total += w;
  }
  for (double& w : t.weights) w /= total;
  return t;
}

/// Probability that an edge of marginal p is closed given its endpoints are
/// not otherwise connected: (1-p) q / (p + (1-p) q).
inline double conditional_closed_weight(double p, double q) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("conditional_closed_weight: p must lie in (0,1)");
  if (!(q > 0.0)) throw std::invalid_argument("conditional_closed_weight: q must be positive");
  return (1.0 - p) * q / (p + (1.0 - p) * q);
}

struct ChainOptions {
  std::uint64_t n_sweeps = 10000;
  std::uint64_t burn_in = 2000;  // default n_sweeps / 5
  std::size_t batches = 32;
};

inline ChainOptions chain_options(std::uint64_t n_sweeps) { return {n_sweeps, n_sweeps / 5, 32}; }

/// Per-sweep observables of a wired chain on [-L, L) started from colour 1:
/// whether 0 joins the ghost in the bond layer, and whether sigma_0 = 1
/// afterwards.
struct WiredSeries {
  std::vector<double> ghost;
  std::vector<double> color1;
};

inline WiredSeries run_wired_chain(const ModelParams& params, Vertex L, const ChainOptions& opt, std::uint64_t seed) {
  if (L < 1) throw std::invalid_argument("wired chain: L must be >= 1");
  if (opt.burn_in >= opt.n_sweeps) throw std::invalid_argument("burn_in must be smaller than n_sweeps");
  auto st = make_potts_state(centered_box(L), params, BoundaryCondition::wired_bc());
  WiredSeries out;
  out.ghost.reserve(opt.n_sweeps - opt.burn_in);
  out.color1.reserve(opt.n_sweeps - opt.burn_in);
  for (std::uint64_t t = 0; t < opt.n_sweeps; ++t) {
    CounterRng rng(seed, {t});
    const auto info = sw_sweep(st, params, rng, 0);
    if (t < opt.burn_in) continue;
    out.ghost.push_back(info.origin_to_ghost);
    out.color1.push_back(st.color(0) == 1);
  }
  return out;
}

inline EstimatorResult from_batches(const BatchMeans& bm, std::uint64_t n, std::uint64_t seed) {
  return {bm.mean, bm.std_error, n, seed, {}, bm.tau_int};
}

/// Finite-volume proxy for theta(q, beta, lambda): P[0 joined to the wired
/// exterior of [-L, L)]. q = 1 uses independent samples instead of a chain.
inline EstimatorResult estimate_theta_fk(const ModelParams& params, Vertex L, const ChainOptions& opt,
                                         std::uint64_t seed) {
  validate_params(params);
  if (opt.burn_in >= opt.n_sweeps) throw std::invalid_argument("burn_in must be smaller than n_sweeps");
  const int q = require_integer_q(params.q, 1);
  EstimatorResult r;
  if (q == 1) {
    r = estimate_exit_probability(params, L, opt.n_sweeps - opt.burn_in, seed);
    r.metadata.clear();
  } else {
    const auto series = run_wired_chain(params, L, opt, seed);
    r = from_batches(batch_means(series.ghost, opt.batches), series.ghost.size(), seed);
  }
  r.metadata.emplace_back("observable", "theta_fk");
  return r;
}

/// (q P[sigma_0 = 1] - 1) / (q - 1) under wired (colour 1) boundary.
inline EstimatorResult magnetization(const ModelParams& params, Vertex L, const ChainOptions& opt, std::uint64_t seed) {
  validate_params(params);
  const int q = require_integer_q(params.q, 2);
  const auto series = run_wired_chain(params, L, opt, seed);
  const auto bm = batch_means(series.color1, opt.batches);
  const double scale = static_cast<double>(q) / static_cast<double>(q - 1);
  BatchMeans m{scale * bm.mean - 1.0 / static_cast<double>(q - 1), scale * bm.std_error, bm.tau_int};
  auto r = from_batches(m, series.color1.size(), seed);
  r.metadata.emplace_back("observable", "magnetization");
  return r;
}

}  // namespace lrperc
