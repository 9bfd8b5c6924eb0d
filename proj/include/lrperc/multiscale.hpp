#pragma once

// Scale and density schedules for the multiscale induction, the recursion
// u_{n+1} <= u_n/100 + 2 C_{n+1}^2 u_n^2 tracked on Monte Carlo estimates,
// and the step from good blocks to a large cluster at the origin.
//
//   C_1 = C1, C_{n+1} = (n+1)^3 C1, K_1 = C1, K_{n+1} = C_{n+1} K_n,
//   so K_n = (n!)^3 C1^n;  theta_{n+1} = theta_n - C0 / C_{n+1}.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lrperc/cluster.hpp"
#include "lrperc/estimator.hpp"
#include "lrperc/model.hpp"
#include "lrperc/renorm.hpp"
#include "lrperc/sampler.hpp"

namespace lrperc {

using BigInt = boost::multiprecision::cpp_int;

class ScheduleError : public std::invalid_argument {
 public:
  explicit ScheduleError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a request would exceed the desk-scale budget.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

struct ScheduleLevel {
  int n = 1;
  std::int64_t C = 0;
  double theta = 0.0;
  BigInt K;
};

struct ScaleSchedule {
  std::int64_t C1 = 2;
  double theta1 = 0.9;
  std::int64_t C0 = 0;
  double theta_inf = 0.8;
  std::vector<ScheduleLevel> levels;  // levels[k].n == k + 1
};

/// C_{n+1} for n >= 1 (and C_1 = C1).
inline std::int64_t schedule_C(std::int64_t C1, int n) {
  return n == 1 ? C1 : static_cast<std::int64_t>(n) * n * n * C1;
}

/// Fails when theta1 - (C0/C1)(zeta(3) - 1) < theta_inf, i.e. when some
/// theta_n of the infinite schedule would fall below theta_inf.
inline ScaleSchedule build_schedule(std::int64_t C1, double theta1, std::int64_t C0, double theta_inf, int n_max) {
  if (C1 < 2) throw ScheduleError("C1 must be >= 2");
  if (C0 < 0) throw ScheduleError("C0 must be >= 0");
  if (n_max < 1) throw ScheduleError("n_max must be >= 1");
  if (!(theta_inf > 0.75 && theta_inf < 1.0)) throw ScheduleError("theta_inf must lie in (3/4,1)");
  if (!(theta1 > theta_inf && theta1 < 1.0)) throw ScheduleError("theta1 must lie in (theta_inf,1)");
  const double drop = static_cast<double>(C0) / static_cast<double>(C1) * zeta_tail(2, 3.0);
  if (theta1 - drop < theta_inf) {
    throw ScheduleError("infeasible schedule: theta_n falls below theta_inf (total drop " + std::to_string(drop) + ")");
  }
  ScaleSchedule s{C1, theta1, C0, theta_inf, {}};
  ScheduleLevel lv{1, C1, theta1, BigInt(C1)};
  s.levels.push_back(lv);
  for (int n = 2; n <= n_max; ++n) {
    lv.n = n;
    lv.C = schedule_C(C1, n);
    lv.theta -= static_cast<double>(C0) / static_cast<double>(lv.C);
    lv.K *= lv.C;
    s.levels.push_back(lv);
  }
  return s;
}

/// ln(400 C1^3): the lambda at which C1 e^{-lambda} = 1 / (400 C1^2).
inline double lambda_seed(std::int64_t C1) {
  if (C1 < 2) throw std::invalid_argument("lambda_seed: C1 must be >= 2");
  return std::log(400.0) + 3.0 * std::log(static_cast<double>(C1));
}

inline constexpr std::int64_t kMaxScale = 10'000'000;

struct RecursionRow {
  ScheduleLevel level;
  EstimatorResult u;  // estimate of P[B_{K_n} is theta_n-bad]
  double rhs_bound = 0.0;  // u/100 + 2 C_{n+1}^2 u^2
  double target = 0.0;     // C_n^{-2} / 400
  bool target_ok = false;  // u_hat <= target
  // u_hat(n) <= rhs_bound(n-1); absent on the first row
  std::optional<bool> recursion_ok;

  std::string pass_flags() const {
    std::string s = std::string("target=") + (target_ok ? "pass" : "fail");
    s += ";recursion=";
    s += recursion_ok ? (*recursion_ok ? "pass" : "fail") : "na";
    return s;
  }
};

using RecursionTrace = std::vector<RecursionRow>;

/// Estimates u_n level by level. Nothing is asserted: the recursion is only
/// claimed for C1 beyond an unquantified threshold.
inline RecursionTrace run_recursion_experiment(const ScaleSchedule& sched, const ModelParams& params,
                                               std::uint64_t n_samples, int max_level, std::uint64_t seed) {
  if (max_level < 1 || static_cast<std::size_t>(max_level) > sched.levels.size()) {
    throw std::invalid_argument("run_recursion_experiment: max_level outside the schedule");
  }
  for (int n = 1; n <= max_level; ++n) {
    if (sched.levels[static_cast<std::size_t>(n - 1)].K > kMaxScale) {
      throw ResourceError("level " + std::to_string(n) + " has K_n = " + sched.levels[static_cast<std::size_t>(n - 1)].K.str() +
                          " > " + std::to_string(kMaxScale));
    }
  }
  RecursionTrace trace;
  for (int n = 1; n <= max_level; ++n) {
    const auto& lv = sched.levels[static_cast<std::size_t>(n - 1)];
    RecursionRow row;
    row.level = lv;
    row.u = estimate_p_bad(lv.K.convert_to<Vertex>(), lv.theta, params, n_samples, derive_key(seed, {static_cast<std::uint64_t>(n)}));
    const double u = row.u.mean;
    const double c_next = static_cast<double>(schedule_C(sched.C1, n + 1));
    row.rhs_bound = u / 100.0 + 2.0 * c_next * c_next * u * u;
    row.target = 1.0 / (400.0 * static_cast<double>(lv.C) * static_cast<double>(lv.C));
    row.target_ok = u <= row.target;
    if (!trace.empty()) row.recursion_ok = u <= trace.back().rhs_bound;
    trace.push_back(row);
  }
  return trace;
}

/// g = P[0 in a cluster of size >= 3K/2] and f = P[B_K is 3/4-good], from
/// one sample of B_{2K} per replicate. Translation invariance gives
/// g >= (3/4) f exactly: the cluster of 0 in B_{2K} dominates the cluster in
/// B_K of any x in B_K after shifting, and a 3/4-good B_K holds at least 3K/2
/// such x out of 2K.
struct DensityReport {
  Vertex K = 0;
  EstimatorResult g;
  EstimatorResult f;
  double slack = 0.0;  // g - 3/4 f
  double slack_stderr = 0.0;
  bool holds = false;  // slack >= -3 stderr

  bool companion_applies() const { return f.mean >= 0.5; }
};

inline DensityReport density_to_percolation(Vertex K, const ModelParams& params, std::uint64_t n, std::uint64_t seed) {
  if (K < 2) throw std::invalid_argument("density_to_percolation: K must be >= 2");
  require_samples(n);
  validate_params(params);
  const Interval box = centered_box(2 * K);
  const auto need = good_threshold(K, 0.75);
  struct Row {
    std::uint8_t g = 0, f = 0;
  };
  const auto rows = parallel_map<Row>(n, [&](std::size_t k) {
    const auto config = sample_config(box, params, replicate_seed(seed, k));
    Row r;
    r.g = clusters_in(config, box).size_of(0) >= need;
    r.f = is_theta_good(config, BlockSpec{K, 0}, 0.75).good;
    return r;
  });
  std::uint64_t g = 0, f = 0;
  MeanAccumulator slack;
  for (const auto& r : rows) {
    g += r.g;
    f += r.f;
    slack.add(static_cast<double>(r.g) - 0.75 * static_cast<double>(r.f));
  }
  DensityReport rep;
  rep.K = K;
  rep.g = proportion(g, n, seed);
  rep.f = proportion(f, n, seed);
  rep.slack = slack.mean();
  rep.slack_stderr = slack.std_error();
  rep.holds = rep.slack >= -3.0 * rep.slack_stderr;
  return rep;
}

}  // namespace lrperc
