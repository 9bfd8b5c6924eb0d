#pragma once

// Probability that the origin connects to the complement of B_L = [-L, L) in
// the infinite-volume Bernoulli measure.

#include <cmath>
#include <cstdint>
#include <vector>

#include "lrperc/cluster.hpp"
#include "lrperc/estimator.hpp"
#include "lrperc/model.hpp"
#include "lrperc/sampler.hpp"

namespace lrperc {

/// Exterior weights sum_{y not in box} -log(1 - p_{x,y}) for every x in box.
inline std::vector<double> exterior_weights(const Interval& box, const ModelParams& params) {
  std::vector<double> out(static_cast<std::size_t>(box.size()));
  for (Vertex x = box.lo; x < box.hi; ++x) out[static_cast<std::size_t>(x - box.lo)] = exterior_weight(x, box, params);
  return out;
}

/// Per-configuration exit value: given the edges inside B_L, the conditional
/// probability that some edge leaves the cluster of 0, i.e.
/// 1 - exp(-sum_{v in C(0)} h(v)). Averaging it over samples is an unbiased
/// estimate of P[0 <-> Z \ B_L] with smaller variance than the indicator.
inline double exit_value(const Configuration& config, const std::vector<double>& weights) {
  const Interval& box = config.box();
  const auto part = clusters_in(config, box);
  const auto origin = part.label(0);
  double h = 0.0;
  for (std::size_t k = 0; k < part.domain_size(); ++k) {
    if (part.label(box.lo + static_cast<Vertex>(k)) == origin) h += weights[k];
  }
  return one_minus_exp(h);
}

inline EstimatorResult estimate_exit_probability(const ModelParams& params, Vertex L, std::uint64_t n,
                                                 std::uint64_t seed) {
  if (L < 1) throw std::invalid_argument("estimate_exit_probability: L must be >= 1");
  if (n < 2) throw std::invalid_argument("estimate_exit_probability: need at least 2 samples");
  validate_params(params);
  const Interval box = centered_box(L);
  const auto weights = exterior_weights(box, params);
  const auto values = parallel_map<double>(n, [&](std::size_t k) {
    return exit_value(sample_config(box, params, replicate_seed(seed, k)), weights);
  });
  MeanAccumulator acc;
  for (double v : values) acc.add(v);
  auto out = from_accumulator(acc, seed);
  out.metadata = {{"observable", "exit_probability"}, {"L", std::to_string(L)}};
  return out;
}

}  // namespace lrperc
