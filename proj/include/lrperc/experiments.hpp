#pragma once

// Experiment driver behind the command-line tool: a flat key = value config,
// a parameter grid, one runner per experiment kind and versioned CSV output.
//
// Config keys (lists are comma-separated, '#' starts a comment):
//
//   kind, master_seed, output          scalars
//   beta, lambda, q, s                 parameter grid
//   sizes                              L or K, depending on kind
//   samples, theta, C, R               estimator settings
//   n_sweeps, burn_in, bc              Swendsen-Wang chains
//   C1, theta1, C0, theta_inf, max_level   multiscale schedule
//
// Grid points are enumerated beta-major in the order beta, lambda, q, s,
// sizes, theta, C, R; point k runs under derive_key(master_seed, {k}) with a
// fixed salt, so the CSV depends on nothing but the config.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lrperc/cluster.hpp"
#include "lrperc/config_io.hpp"
#include "lrperc/crossing.hpp"
#include "lrperc/estimator.hpp"
#include "lrperc/fk_potts.hpp"
#include "lrperc/model.hpp"
#include "lrperc/multiscale.hpp"
#include "lrperc/renorm.hpp"
#include "lrperc/sampler.hpp"

#ifndef LRPERC_VERSION
#define LRPERC_VERSION "0.0.0-dev"
#endif

namespace lrperc {

inline constexpr const char* kSoftwareVersion = LRPERC_VERSION;

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"sample",     "p-bad",   "pbar",          "lemma2",    "thm2-events",
                                              "multiscale", "fk-theta", "magnetization", "theta-scan"};
  return kinds;
}

struct ExperimentConfig {
  std::string kind;
  std::vector<double> beta, lambda, q{1.0}, s{2.0};
  std::vector<Vertex> sizes;
  std::uint64_t samples = 0;
  std::uint64_t master_seed = 0;
  std::string output;  // CSV file name; defaults to <kind>.csv

  std::vector<double> theta;
  std::vector<Vertex> C, R;

  std::uint64_t n_sweeps = 0;
  std::optional<std::uint64_t> burn_in;
  std::string bc = "wired";

  std::int64_t C1 = 0;
  double theta1 = 0.0;
  std::int64_t C0 = 0;
  double theta_inf = 0.0;
  int max_level = 0;

  // Entries as written, in file order, for the manifest.
  std::vector<std::pair<std::string, std::string>> entries;
  std::string seed_source = "config";

  std::string output_name() const { return output.empty() ? kind + ".csv" : output; }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& key, const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty list element in '" + key + "'");
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError("'" + key + "' has no values");
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("'" + key + "': cannot parse '" + text + "'");
  return v;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  for (const auto& item : split_list(key, value)) out.push_back(parse_number<T>(key, item));
  return out;
}

template <typename T>
T parse_scalar(const std::string& key, const std::string& value) {
  const auto items = split_list(key, value);
  if (items.size() != 1) throw ConfigError("'" + key + "' takes a single value");
  return parse_number<T>(key, items[0]);
}

inline const std::set<std::string>& keys_for(const std::string& kind) {
  static const std::map<std::string, std::set<std::string>> table = [] {
    const std::set<std::string> common{"kind", "master_seed", "output", "beta", "lambda", "q", "s"};
    auto with = [&](std::initializer_list<std::string> extra) {
      auto k = common;
      k.insert(extra);
      return k;
    };
    std::map<std::string, std::set<std::string>> t;
    t["sample"] = with({"sizes"});
    t["p-bad"] = with({"sizes", "theta", "samples"});
    t["pbar"] = with({"sizes", "samples"});
    t["lemma2"] = with({"sizes", "C", "theta", "R", "samples"});
    t["thm2-events"] = with({"sizes", "samples"});
    t["multiscale"] = with({"samples", "C1", "theta1", "C0", "theta_inf", "max_level"});
    t["fk-theta"] = with({"sizes", "n_sweeps", "burn_in", "bc"});
    t["magnetization"] = t["fk-theta"];
    t["theta-scan"] = t["fk-theta"];
    return t;
  }();
  const auto it = table.find(kind);
  if (it == table.end()) throw ConfigError("unknown experiment kind '" + kind + "'");
  return it->second;
}

inline bool is_fk_kind(const std::string& kind) {
  return kind == "fk-theta" || kind == "magnetization" || kind == "theta-scan";
}

}  // namespace detail

/// Parses the config text. `kind` (from the command line) wins when the file
/// omits it and must agree when both are given.
inline ExperimentConfig parse_config(const std::string& text, const std::string& kind = {}) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string line;
  for (int lineno = 1; std::getline(is, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    auto key = detail::trim(line.substr(0, eq));
    auto value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    entries.emplace_back(key, value);
  }

  ExperimentConfig c;
  c.kind = kind;
  for (const auto& [k, v] : entries) {
    if (k != "kind") continue;
    if (!c.kind.empty() && c.kind != v) throw ConfigError("config kind '" + v + "' does not match '" + c.kind + "'");
    c.kind = v;
  }
  if (c.kind.empty()) throw ConfigError("no experiment kind given");
  const auto& allowed = detail::keys_for(c.kind);

  for (const auto& [k, v] : entries) {
    if (!allowed.count(k)) throw ConfigError("key '" + k + "' does not apply to kind " + c.kind);
    if (k == "kind") continue;
    if (k == "beta") c.beta = detail::parse_list<double>(k, v);
    else if (k == "lambda") c.lambda = detail::parse_list<double>(k, v);
    else if (k == "q") c.q = detail::parse_list<double>(k, v);
    else if (k == "s") c.s = detail::parse_list<double>(k, v);
    else if (k == "sizes") c.sizes = detail::parse_list<Vertex>(k, v);
    else if (k == "samples") c.samples = detail::parse_scalar<std::uint64_t>(k, v);
    else if (k == "master_seed") c.master_seed = detail::parse_scalar<std::uint64_t>(k, v);
    else if (k == "output") c.output = v;
    else if (k == "theta") c.theta = detail::parse_list<double>(k, v);
    else if (k == "C") c.C = detail::parse_list<Vertex>(k, v);
    else if (k == "R") c.R = detail::parse_list<Vertex>(k, v);
    else if (k == "n_sweeps") c.n_sweeps = detail::parse_scalar<std::uint64_t>(k, v);
    else if (k == "burn_in") c.burn_in = detail::parse_scalar<std::uint64_t>(k, v);
    else if (k == "bc") c.bc = v;
    else if (k == "C1") c.C1 = detail::parse_scalar<std::int64_t>(k, v);
    else if (k == "theta1") c.theta1 = detail::parse_scalar<double>(k, v);
    else if (k == "C0") c.C0 = detail::parse_scalar<std::int64_t>(k, v);
    else if (k == "theta_inf") c.theta_inf = detail::parse_scalar<double>(k, v);
    else if (k == "max_level") c.max_level = detail::parse_scalar<int>(k, v);
  }
  c.entries = std::move(entries);
  return c;
}

inline ExperimentConfig load_experiment_config(const std::string& path, const std::string& kind = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), kind);
}

/// Applies LRPERC_SEED (or the given value) over master_seed.
inline void apply_seed_override(ExperimentConfig& c, const char* env_value) {
  if (env_value == nullptr) return;
  c.master_seed = detail::parse_number<std::uint64_t>("LRPERC_SEED", detail::trim(env_value));
  c.seed_source = "LRPERC_SEED";
}

struct GridPoint {
  std::size_t index = 0;
  ModelParams params;
  Vertex size = 0;
  double theta = 0.0;
  Vertex C = 0;
  Vertex R = 0;
  std::uint64_t seed = 0;
};

inline std::uint64_t grid_seed(std::uint64_t master, std::size_t index) {
  return derive_key(master, {0x67726964ULL, static_cast<std::uint64_t>(index)});
}

/// Cartesian product in the documented order. Unused axes contribute one
/// placeholder value.
inline std::vector<GridPoint> expand_grid(const ExperimentConfig& c) {
  auto or_one = [](auto v, auto fill) {
    if (v.empty()) v.push_back(fill);
    return v;
  };
  const auto sizes = or_one(c.sizes, Vertex{0});
  const auto thetas = or_one(c.theta, 0.0);
  const auto Cs = or_one(c.C, Vertex{0});
  const auto Rs = or_one(c.R, Vertex{0});
  std::vector<GridPoint> grid;
  for (double b : c.beta)
    for (double l : c.lambda)
      for (double q : c.q)
        for (double s : c.s)
          for (Vertex L : sizes)
            for (double th : thetas)
              for (Vertex C : Cs)
                for (Vertex R : Rs) {
                  GridPoint g;
                  g.index = grid.size();
                  g.params = {b, l, q, s};
                  g.size = L;
                  g.theta = th;
                  g.C = C;
                  g.R = R;
                  g.seed = grid_seed(c.master_seed, g.index);
                  grid.push_back(g);
                }
  std::set<std::uint64_t> seeds;
  for (const auto& g : grid) {
    if (!seeds.insert(g.seed).second) throw std::logic_error("grid seed collision at index " + std::to_string(g.index));
  }
  return grid;
}

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

inline void require_scale(double extent, const std::string& what) {
  if (extent > static_cast<double>(kMaxScale)) {
    throw ResourceError(what + " spans " + std::to_string(static_cast<long long>(extent)) + " sites, above the cap of " +
                        std::to_string(kMaxScale));
  }
}

}  // namespace detail

/// Checks everything that can be checked before any sampling. Throws
/// ConfigError for bad input and ResourceError for oversized requests.
inline void validate_config(const ExperimentConfig& c) {
  using detail::require;
  const auto& allowed = detail::keys_for(c.kind);
  require(!c.beta.empty() && !c.lambda.empty(), "beta and lambda are required");
  for (double b : c.beta)
    for (double l : c.lambda)
      for (double q : c.q)
        for (double s : c.s) {
          try {
            validate_params({b, l, q, s});
          } catch (const ParamError& e) {
            throw ConfigError(e.what());
          }
        }
  require(c.output.find('/') == std::string::npos, "output must be a plain file name");
  if (c.kind == "sample" || c.kind == "p-bad" || c.kind == "pbar" || c.kind == "lemma2" || c.kind == "thm2-events" ||
      c.kind == "multiscale") {
    require(c.q.size() == 1 && c.q[0] == 1.0, "kind " + c.kind + " samples Bernoulli percolation and needs q = 1");
  }
  if (allowed.count("sizes")) require(!c.sizes.empty(), "sizes is required for kind " + c.kind);
  if (allowed.count("samples")) require(c.samples >= 100, "samples must be at least 100");
  for (Vertex L : c.sizes) require(L >= 1, "sizes must be positive");

  if (c.kind == "sample") {
    for (Vertex L : c.sizes) detail::require_scale(2.0 * L, "sample box");
  } else if (c.kind == "p-bad") {
    require(!c.theta.empty(), "theta is required for p-bad");
    for (double t : c.theta) require(t > 0.0 && t < 1.0, "theta must lie in (0,1)");
    for (Vertex K : c.sizes) {
      require(K >= 2, "p-bad needs K >= 2");
      detail::require_scale(2.0 * K, "block B_K");
    }
  } else if (c.kind == "pbar" || c.kind == "thm2-events") {
    const double span = c.kind == "pbar" ? 10.0 : 24.0;
    for (Vertex K : c.sizes) detail::require_scale(span * K, c.kind + " window");
  } else if (c.kind == "lemma2") {
    require(!c.theta.empty() && !c.C.empty() && !c.R.empty(), "lemma2 needs theta, C and R");
    for (double t : c.theta) {
      require(t > 0.0 && t < 1.0, "theta must lie in (0,1)");
      for (double b : c.beta) require(b * t * t < 1.0, "lemma2 needs beta theta^2 < 1 at every grid point");
    }
    for (Vertex C : c.C) require(C >= 2, "C must be >= 2");
    for (Vertex R : c.R) require(R >= 1, "R must be >= 1");
    for (Vertex K : c.sizes)
      for (Vertex C : c.C)
        for (Vertex R : c.R) {
          detail::require_scale(10.0 * static_cast<double>(C) * K, "lemma2 window for pbar(CK)");
          detail::require_scale(4.0 * static_cast<double>(C) * K + 2.0 * R, "unbridged box");
        }
  } else if (c.kind == "multiscale") {
    require(c.beta.size() == 1 && c.lambda.size() == 1 && c.s.size() == 1,
            "multiscale runs a single parameter point");
    require(c.max_level >= 1, "max_level must be >= 1");
    ScaleSchedule sched;
    try {
      sched = build_schedule(c.C1, c.theta1, c.C0, c.theta_inf, c.max_level);
    } catch (const ScheduleError& e) {
      throw ConfigError(e.what());
    }
    for (const auto& lv : sched.levels) {
      if (lv.K > kMaxScale) {
        throw ResourceError("level " + std::to_string(lv.n) + " has K_n = " + lv.K.str() + ", above the cap of " +
                            std::to_string(kMaxScale));
      }
    }
  } else if (detail::is_fk_kind(c.kind)) {
    require(c.bc == "wired", "only bc = wired is supported for " + c.kind);
    require(c.n_sweeps >= 2, "n_sweeps must be >= 2");
    const auto burn = c.burn_in.value_or(c.n_sweeps / 5);
    require(burn < c.n_sweeps && c.n_sweeps - burn >= 2, "burn_in must leave at least 2 sweeps");
    for (double q : c.q) {
      try {
        require_integer_q(q, c.kind == "magnetization" ? 2 : 1);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    for (Vertex L : c.sizes) detail::require_scale(2.0 * L, "chain box");
  }
}

/// Column names of the CSV written for a kind.
inline std::vector<std::string> csv_header(const std::string& kind) {
  if (kind == "sample") {
    return {"beta", "lambda", "s", "L", "open_edges", "expected_edges", "largest_cluster", "file", "seed"};
  }
  if (kind == "p-bad") return {"K", "theta", "beta", "lambda", "q", "n", "p_hat", "stderr", "seed"};
  if (kind == "pbar" || kind == "lemma2" || kind == "thm2-events") {
    return {"kind", "K", "C", "R", "beta", "lambda", "theta", "n", "estimate", "stderr", "bound", "seed"};
  }
  if (kind == "multiscale") {
    return {"n", "C_n", "theta_n", "K_n", "u_hat", "stderr", "rhs_bound", "target", "pass_flags"};
  }
  if (kind == "fk-theta" || kind == "magnetization" || kind == "theta-scan") {
    return {"q",       "beta",       "lambda",   "L",      "bc",      "n_sweeps",
            "burn_in", "observable", "estimate", "stderr", "tau_int", "seed"};
  }
  throw ConfigError("unknown experiment kind '" + kind + "'");
}

/// CSV body plus any side files, all held in memory until written.
struct RunOutput {
  std::string schema;  // "<kind>/v1"
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, std::string>> artifacts;  // file name, content
  nlohmann::ordered_json notes = nlohmann::ordered_json::object();

  std::string csv() const {
    std::string out = "# schema=" + schema + "\n";
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) out += ',';
        out += cells[k];
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

namespace detail {

// Shortest text that reads back to the same double.
inline std::string num(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}
inline std::string num(Vertex x) { return std::to_string(x); }
inline std::string num(std::uint64_t x) { return std::to_string(x); }


// Runs fn over the grid. Grid points go to the pool when there are enough of
// them; otherwise each point parallelises its own replicate loop.
template <typename T>
std::vector<T> map_grid(const std::vector<GridPoint>& grid, const std::function<T(const GridPoint&)>& fn) {
  if (grid.size() >= worker_threads().load()) {
    return parallel_map<T>(grid.size(), [&](std::size_t k) { return fn(grid[k]); });
  }
  std::vector<T> out;
  for (const auto& g : grid) out.push_back(fn(g));
  return out;
}

using Row = std::vector<std::string>;

inline RunOutput run_sample(const ExperimentConfig& c, const std::vector<GridPoint>& grid) {
  RunOutput out;
  const auto stem = std::filesystem::path(c.output_name()).stem().string();
  struct Item {
    Row row;
    std::string name, text;
  };
  const auto items = map_grid<Item>(grid, [&](const GridPoint& g) {
    const auto box = centered_box(g.size);
    const auto config = sample_config(box, g.params, g.seed);
    Item it;
    it.name = stem + "." + std::to_string(g.index) + ".cfg";
    it.text = dump_config(config);
    it.row = {num(g.params.beta), num(g.params.lambda), num(g.params.s),
              num(g.size),        num(static_cast<std::uint64_t>(config.open_count())),
              num(expected_edge_count(box, g.params)),
              num(static_cast<std::uint64_t>(largest_cluster(clusters_in(config, box)).size)),
              it.name,            num(g.seed)};
    return it;
  });
  for (const auto& it : items) {
    out.rows.push_back(it.row);
    out.artifacts.emplace_back(it.name, it.text);
  }
  return out;
}

inline RunOutput run_p_bad(const ExperimentConfig& c, const std::vector<GridPoint>& grid) {
  RunOutput out;
  out.rows = map_grid<Row>(grid, [&](const GridPoint& g) {
    const auto r = estimate_p_bad(g.size, g.theta, g.params, c.samples, g.seed);
    return Row{num(g.size), num(g.theta), num(g.params.beta), num(g.params.lambda), num(g.params.q),
               num(r.n),    num(r.mean),  num(r.std_error),  num(g.seed)};
  });
  return out;
}

inline RunOutput run_pbar(const ExperimentConfig& c, const std::vector<GridPoint>& grid) {
  RunOutput out;
  out.rows = map_grid<Row>(grid, [&](const GridPoint& g) {
    const auto r = estimate_pbar(g.size, g.params, 5 * g.size, c.samples, g.seed);
    return Row{"pbar", num(g.size), "", "", num(g.params.beta), num(g.params.lambda), "", num(r.n),
               num(r.mean), num(r.std_error), "", num(g.seed)};
  });
  return out;
}

// estimate = p̄(CK), bound = (C^{1-beta theta^2}/9e) min{p̄(K), 1/C}.
inline RunOutput run_lemma2(const ExperimentConfig& c, const std::vector<GridPoint>& grid) {
  RunOutput out;
  struct Item {
    Row row;
    nlohmann::ordered_json note;
  };
  const auto items = map_grid<Item>(grid, [&](const GridPoint& g) {
    const auto r = check_lemma2(g.size, g.C, g.params, g.theta, g.R, c.samples, g.seed);
    Item it;
    it.row = {"lemma2", num(g.size), num(g.C), num(g.R), num(g.params.beta), num(g.params.lambda), num(g.theta),
              num(r.pbar_CK.n), num(r.pbar_CK.mean), num(r.pbar_CK.std_error), num(r.bound), num(g.seed)};
    it.note = {{"index", g.index},
               {"pbar_K", r.pbar_K.mean},
               {"pbar_K_stderr", r.pbar_K.std_error},
               {"ratio", r.ratio},
               {"ratio_stderr", r.ratio_stderr},
               {"unbridged_mean", r.unbridged.count.mean},
               {"unbridged_stderr", r.unbridged.count.std_error},
               {"unbridged_bound", r.unbridged.bound}};
    return it;
  });
  out.notes["points"] = nlohmann::ordered_json::array();
  for (const auto& it : items) {
    out.rows.push_back(it.row);
    out.notes["points"].push_back(it.note);
  }
  return out;
}

// estimate = 1 - P̂[A], bound = P[B] p̄^2 with the exact P[B]; the claimed
// inequality is bound <= estimate.
inline RunOutput run_thm2(const ExperimentConfig& c, const std::vector<GridPoint>& grid) {
  RunOutput out;
  struct Item {
    Row row;
    nlohmann::ordered_json note;
  };
  const auto items = map_grid<Item>(grid, [&](const GridPoint& g) {
    const auto r = check_theorem_ii_events(g.size, g.params, c.samples, g.seed);
    Item it;
    it.row = {"thm2ev", num(g.size), "", "", num(g.params.beta), num(g.params.lambda), "", num(r.n),
              num(r.rhs), num(r.joint_stderr), num(r.lhs), num(g.seed)};
    it.note = {{"index", g.index},
               {"p_A", r.p_A.mean},
               {"p_B_empirical", r.p_B.mean},
               {"p_B_exact", r.p_B_exact},
               {"pbar", r.pbar.mean},
               {"inequality_holds", r.inequality_holds},
               {"implication_violations", r.violations},
               {"conditioned_antecedents", r.conditioned_antecedents}};
    return it;
  });
  out.notes["points"] = nlohmann::ordered_json::array();
  for (const auto& it : items) {
    out.rows.push_back(it.row);
    out.notes["points"].push_back(it.note);
  }
  return out;
}

inline RunOutput run_multiscale(const ExperimentConfig& c, const std::vector<GridPoint>& grid) {
  RunOutput out;
  const auto sched = build_schedule(c.C1, c.theta1, c.C0, c.theta_inf, c.max_level);
  const auto& g = grid.front();
  for (const auto& row : run_recursion_experiment(sched, g.params, c.samples, c.max_level, g.seed)) {
    out.rows.push_back({std::to_string(row.level.n), std::to_string(row.level.C), num(row.level.theta),
                        row.level.K.str(), num(row.u.mean), num(row.u.std_error), num(row.rhs_bound),
                        num(row.target), row.pass_flags()});
  }
  out.notes["lambda_seed"] = lambda_seed(c.C1);
  return out;
}

inline RunOutput run_fk(const ExperimentConfig& c, const std::vector<GridPoint>& grid) {
  RunOutput out;
  ChainOptions opt = chain_options(c.n_sweeps);
  if (c.burn_in) opt.burn_in = *c.burn_in;
  const bool magnet = c.kind == "magnetization";
  out.rows = map_grid<Row>(grid, [&](const GridPoint& g) {
    const auto r = magnet ? magnetization(g.params, g.size, opt, g.seed) : estimate_theta_fk(g.params, g.size, opt, g.seed);
    return Row{num(g.params.q), num(g.params.beta), num(g.params.lambda), num(g.size), c.bc,
               num(opt.n_sweeps), num(opt.burn_in), magnet ? "magnetization" : "theta_fk", num(r.mean),
               num(r.std_error), num(r.tau_int), num(g.seed)};
  });
  return out;
}

}  // namespace detail

/// Runs the experiment in memory. Deterministic given the config: the thread
/// count only changes scheduling.
inline RunOutput run_experiment(const ExperimentConfig& c) {
  validate_config(c);
  const auto grid = expand_grid(c);
  RunOutput out;
  if (c.kind == "sample") out = detail::run_sample(c, grid);
  else if (c.kind == "p-bad") out = detail::run_p_bad(c, grid);
  else if (c.kind == "pbar") out = detail::run_pbar(c, grid);
  else if (c.kind == "lemma2") out = detail::run_lemma2(c, grid);
  else if (c.kind == "thm2-events") out = detail::run_thm2(c, grid);
  else if (c.kind == "multiscale") out = detail::run_multiscale(c, grid);
  else out = detail::run_fk(c, grid);
  out.schema = c.kind + "/v1";
  out.header = csv_header(c.kind);
  return out;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::ordered_json make_manifest(const ExperimentConfig& c, const RunOutput& out, unsigned threads) {
  nlohmann::ordered_json m;
  m["software"] = {{"name", "lrperc"}, {"version", kSoftwareVersion}};
  m["kind"] = c.kind;
  m["schema"] = out.schema;
  m["master_seed"] = c.master_seed;
  m["seed_source"] = c.seed_source;
  auto cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : c.entries) cfg[k] = v;
  m["config"] = cfg;
  m["csv"] = c.output_name();
  m["rows"] = out.rows.size();
  auto files = nlohmann::ordered_json::array();
  for (const auto& a : out.artifacts) files.push_back(a.first);
  m["artifacts"] = files;
  m["threads"] = threads;
  m["created_utc"] = utc_timestamp();
  m["notes"] = out.notes;
  return m;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  f.close();
  if (!f) throw IoError("write to " + path.string() + " failed");
}

/// Writes the CSV, side files and <csv>.manifest.json into dir. Returns the
/// CSV path.
inline std::filesystem::path write_outputs(const std::filesystem::path& dir, const ExperimentConfig& c,
                                           const RunOutput& out, unsigned threads) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto csv_path = dir / c.output_name();
  write_text_file(csv_path, out.csv());
  for (const auto& [name, text] : out.artifacts) write_text_file(dir / name, text);
  write_text_file(dir / (c.output_name() + ".manifest.json"), make_manifest(c, out, threads).dump(2) + "\n");
  return csv_path;
}

}  // namespace lrperc
