#pragma once

// Line-based text format for configurations:
//
//   box <lo> <hi> <seed> <beta> <lambda> <q> <s>
//   <i> <j>            one line per open edge, nearest-neighbour included
//
// Edges are written in lexicographic order with i < j. Reals use 17
// significant digits so a dump/load round trip is exact.

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrperc/model.hpp"
#include "lrperc/sampler.hpp"

namespace lrperc {

class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void dump_config(std::ostream& os, const Configuration& c) {
  const auto& p = c.params();
  os << "box " << c.box().lo << ' ' << c.box().hi << ' ' << c.seed() << ' ' << format_real(p.beta) << ' '
     << format_real(p.lambda) << ' ' << format_real(p.q) << ' ' << format_real(p.s) << '\n';
  for (const Edge& e : c.open_edges()) os << e.i << ' ' << e.j << '\n';
}

inline std::string dump_config(const Configuration& c) {
  std::ostringstream os;
  dump_config(os, c);
  return os.str();
}

inline Configuration load_config(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("configuration: missing header line");
  std::istringstream head(line);
  std::string tag;
  Vertex lo = 0, hi = 0;
  std::uint64_t seed = 0;
  ModelParams p;
  if (!(head >> tag >> lo >> hi >> seed >> p.beta >> p.lambda >> p.q >> p.s) || tag != "box") {
    throw FormatError("configuration: malformed header '" + line + "'");
  }
  if (!(lo < hi)) throw FormatError("configuration: empty box");
  std::vector<Edge> edges;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Edge e;
    std::string extra;
    if (!(ls >> e.i >> e.j) || (ls >> extra)) {
      throw FormatError("configuration: malformed edge on line " + std::to_string(lineno));
    }
    edges.push_back(e);
  }
  try {
    return Configuration::from_edges(Interval(lo, hi), std::move(edges), seed, p);
  } catch (const std::invalid_argument& ex) {
    throw FormatError(std::string("configuration: ") + ex.what());
  }
}

inline Configuration load_config(const std::string& text) {
  std::istringstream is(text);
  return load_config(is);
}

}  // namespace lrperc
