#pragma once

// Model parameters, couplings and edge probabilities for 1D long-range
// percolation with J(d) = 1/d^s. Everything else in the library reads its
// probabilities from here.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrperc {

using Vertex = std::int64_t;

class ParamError : public std::invalid_argument {
 public:
  explicit ParamError(const std::string& what) : std::invalid_argument(what) {}
};

struct ModelParams {
  double beta = 1.0;    // long-range inverse temperature
  double lambda = 1.0;  // nearest-neighbour strength
  double q = 1.0;       // cluster weight
  double s = 2.0;       // coupling exponent
};

// Half-open integer interval [lo, hi).
struct Interval {
  Vertex lo = 0;
  Vertex hi = 1;

  constexpr Interval() = default;
  Interval(Vertex lo_, Vertex hi_) : lo(lo_), hi(hi_) {
    if (!(lo < hi)) {
      throw std::invalid_argument("interval requires lo < hi (got [" + std::to_string(lo) +
                                  ", " + std::to_string(hi) + "))");
    }
  }

  Vertex size() const { return hi - lo; }
  bool contains(Vertex x) const { return lo <= x && x < hi; }
  bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

// Symmetric box [-half, half).
inline Interval centered_box(Vertex half) { return Interval(-half, half); }

inline std::vector<std::string> param_violations(const ModelParams& p) {
  std::vector<std::string> out;
  if (!(p.beta > 0.0) || !std::isfinite(p.beta)) out.emplace_back("beta must be positive");
  if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) out.emplace_back("lambda must be positive");
  if (!(p.q > 0.0) || !std::isfinite(p.q)) out.emplace_back("q must be positive");
  if (!(p.s > 1.0 && p.s <= 2.0)) out.emplace_back("s must lie in (1,2]");
  return out;
}

// Returns the parameters unchanged, or throws ParamError listing every
// violated bound (one per line).
inline ModelParams validate_params(const ModelParams& raw) {
  auto errs = param_violations(raw);
  if (!errs.empty()) {
    std::string msg;
    for (const auto& e : errs) {
      if (!msg.empty()) msg += '\n';
      msg += e;
    }
    throw ParamError(msg);
  }
  return raw;
}

inline double coupling(Vertex d, double s) {
  if (d <= 0) throw std::invalid_argument("coupling: distance must be >= 1 (no self-edges)");
  return std::pow(static_cast<double>(d), -s);
}

// -log(1 - p_{i,j}) for an edge of length d: lambda for d = 1, beta*J(d) otherwise.
inline double edge_weight(Vertex d, const ModelParams& p) {
  if (d <= 0) throw std::invalid_argument("edge_weight: distance must be >= 1");
  return d == 1 ? p.lambda : p.beta * coupling(d, p.s);
}

// 1 - exp(-x) without cancellation for small x.
inline double one_minus_exp(double x) { return -std::expm1(-x); }

inline double edge_prob_at_distance(Vertex d, const ModelParams& p) {
  return one_minus_exp(edge_weight(d, p));
}

inline double edge_prob(Vertex i, Vertex j, const ModelParams& p) {
  if (i == j) throw std::invalid_argument("edge_prob: i == j (no self-edges)");
  return edge_prob_at_distance(i > j ? i - j : j - i, p);
}

// Sum_{d >= a} d^{-s} for a >= 1, s > 1. A short direct sum followed by an
// Euler-Maclaurin tail through the f^(5) term; the truncation error is
// below 1e-14 for all s in (1, 2].
inline double zeta_tail(Vertex a, double s) {
  if (a < 1) throw std::invalid_argument("zeta_tail: a must be >= 1");
  if (!(s > 1.0)) throw std::invalid_argument("zeta_tail: s must exceed 1");
  constexpr Vertex kDirect = 32;
  double sum = 0.0;
  for (Vertex d = a + kDirect - 1; d >= a; --d) sum += std::pow(static_cast<double>(d), -s);
  const double n = static_cast<double>(a + kDirect);
  const double fn = std::pow(n, -s);
  double tail = n * fn / (s - 1.0) + 0.5 * fn;
  tail += s * fn / n / 12.0;
  tail -= s * (s + 1) * (s + 2) * fn / (n * n * n) / 720.0;
  tail += s * (s + 1) * (s + 2) * (s + 3) * (s + 4) * fn / std::pow(n, 5) / 30240.0;
  return sum + tail;
}

// Aggregated weight sum_{y outside box} -log(1 - p_{x,y}) for x inside box.
// This is the ghost-bond weight realizing a wired exterior, and also the
// exact log-probability that no edge from x leaves the box.
inline double exterior_weight(Vertex x, const Interval& box, const ModelParams& p) {
  if (!box.contains(x)) throw std::invalid_argument("exterior_weight: vertex outside box");
  auto side = [&](Vertex a) {
    return a == 1 ? p.lambda + p.beta * zeta_tail(2, p.s) : p.beta * zeta_tail(a, p.s);
  };
  return side(x - box.lo + 1) + side(box.hi - x);
}

}  // namespace lrperc
