#pragma once

// Static SVG plots of experiment CSVs. One figure per file: a θ̂-vs-β scan
// with the β = 1 line and the βθ² = 1 curve, decay curves on log-log axes,
// and the multiscale trace against its target.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrperc/experiments.hpp"

namespace lrperc {

class PlotError : public std::runtime_error {
 public:
  explicit PlotError(const std::string& what) : std::runtime_error(what) {}
};

struct CsvTable {
  std::string kind;  // from the "# schema=<kind>/v1" line
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw PlotError("CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
  double number(std::size_t row, const std::string& name) const {
    const auto& cell = rows[row][column(name)];
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used == cell.size()) return v;
    } catch (const std::exception&) {
    }
    throw PlotError("row " + std::to_string(row + 1) + ": '" + name + "' is not a number ('" + cell + "')");
  }
  const std::string& text(std::size_t row, const std::string& name) const { return rows[row][column(name)]; }
};

inline CsvTable parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  CsvTable t;
  if (!std::getline(is, line) || line.empty()) throw PlotError("empty CSV");
  const std::string tag = "# schema=";
  if (line.rfind(tag, 0) != 0 || line.size() <= tag.size() + 3 || line.substr(line.size() - 3) != "/v1") {
    throw PlotError("missing '# schema=<kind>/v1' line");
  }
  t.kind = line.substr(tag.size(), line.size() - tag.size() - 3);
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(is, line)) throw PlotError("CSV has no header row");
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) throw PlotError("row width does not match the header");
    t.rows.push_back(std::move(cells));
  }
  if (t.rows.empty()) throw PlotError("CSV has no data rows");
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

namespace svg {

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;
  std::string label;

  double unit(double v) const {
    if (log) return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
    return (v - lo) / (hi - lo);
  }
  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e += 1.0) {
        const double v = std::pow(10.0, e);
        if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) out.push_back(v);
      }
      return out;
    }
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      step = m * mag;
      if (step >= raw) break;
    }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(v);
    return out;
  }
};

// Fits an axis around the data; log axes pad by a factor, linear by 5%.
inline Axis fit_axis(std::vector<double> v, bool log, const std::string& label) {
  if (v.empty()) throw PlotError("nothing to plot on axis '" + label + "'");
  if (log) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !(x > 0.0); }), v.end());
    if (v.empty()) return Axis{1e-6, 1.0, true, label + " (no positive values)"};
  }
  auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  Axis a{*mn, *mx, log, label};
  if (log) {
    a.lo = std::pow(10.0, std::floor(std::log10(a.lo)));
    a.hi = std::pow(10.0, std::ceil(std::log10(a.hi)));
    if (a.hi <= a.lo) a.hi = a.lo * 10.0;
  } else {
    const double pad = a.hi > a.lo ? 0.05 * (a.hi - a.lo) : std::max(0.5, 0.05 * std::abs(a.lo));
    a.lo -= pad;
    a.hi += pad;
  }
  return a;
}

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

struct Point {
  double x, y, err = 0.0;
};

struct Series {
  std::string name;
  std::string id;
  std::vector<Point> points;
  bool markers = true;
  bool dashed = false;
};

class Figure {
 public:
  Figure(std::string title, Axis x, Axis y) : title_(std::move(title)), x_(std::move(x)), y_(std::move(y)) {}

  void add(Series s) { series_.push_back(std::move(s)); }
  void vline(double x, const std::string& id, const std::string& label) { vlines_.push_back({x, id, label}); }

  std::string render() const {
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title_) << "</text>\n";
    o << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << pw() << "\" height=\"" << ph()
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : x_.ticks()) {
      const double px = sx(t);
      o << "<line x1=\"" << px << "\" y1=\"" << kT + ph() << "\" x2=\"" << px << "\" y2=\"" << kT + ph() + 5
        << "\" stroke=\"black\"/><text x=\"" << px << "\" y=\"" << kT + ph() + 18 << "\" text-anchor=\"middle\">"
        << fmt(t) << "</text>\n";
    }
    for (double t : y_.ticks()) {
      const double py = sy(t);
      o << "<line x1=\"" << kL - 5 << "\" y1=\"" << py << "\" x2=\"" << kL << "\" y2=\"" << py
        << "\" stroke=\"black\"/><text x=\"" << kL - 8 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << fmt(t)
        << "</text>\n";
    }
    o << "<text x=\"" << kL + pw() / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">" << escape(x_.label)
      << "</text>\n";
    o << "<text x=\"16\" y=\"" << kT + ph() / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kT + ph() / 2 << ")\">" << escape(y_.label) << "</text>\n";
    o << "<defs><clipPath id=\"plot\"><rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << pw() << "\" height=\""
      << ph() << "\"/></clipPath></defs>\n";
    for (const auto& v : vlines_) {
      if (!(v.x >= x_.lo && v.x <= x_.hi)) continue;
      o << "<g id=\"" << v.id << "\"><line x1=\"" << sx(v.x) << "\" y1=\"" << kT << "\" x2=\"" << sx(v.x) << "\" y2=\""
        << kT + ph() << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/><text x=\"" << sx(v.x) + 4 << "\" y=\""
        << kT + 14 << "\" fill=\"gray\">" << escape(v.label) << "</text></g>\n";
    }
    for (std::size_t k = 0; k < series_.size(); ++k) {
      const auto& s = series_[k];
      const char* colour = kPalette[k % kPalette.size()];
      o << "<g id=\"" << s.id << "\" clip-path=\"url(#plot)\">\n";
      std::vector<Point> pts;
      for (const auto& p : s.points) {
        if (visible(p)) pts.push_back(p);
      }
      if (pts.size() > 1) {
        o << "<polyline fill=\"none\" stroke=\"" << colour << "\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "")
          << " points=\"";
        for (const auto& p : pts) o << sx(p.x) << ',' << sy(p.y) << ' ';
        o << "\"/>\n";
      }
      if (s.markers) {
        for (const auto& p : pts) {
          if (p.err > 0.0) {
            const double lo = y_.log ? std::max(p.y - p.err, y_.lo) : p.y - p.err;
            o << "<line x1=\"" << sx(p.x) << "\" y1=\"" << sy(lo) << "\" x2=\"" << sx(p.x) << "\" y2=\""
              << sy(p.y + p.err) << "\" stroke=\"" << colour << "\"/>";
          }
          o << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y) << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
        }
      }
      o << "</g>\n";
      const double ly = kT + 14 + 16.0 * static_cast<double>(k);
      o << "<line x1=\"" << kL + pw() + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kL + pw() + 30 << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << colour << "\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "")
        << "/><text x=\"" << kL + pw() + 34 << "\" y=\"" << ly << "\">" << escape(s.name) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
  }

 private:
  static constexpr double kW = 820, kH = 460, kL = 70, kT = 36, kR = 230, kB = 50;
  static constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                       "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  struct VLine {
    double x;
    std::string id, label;
  };

  static double pw() { return kW - kL - kR; }
  static double ph() { return kH - kT - kB; }
  double sx(double x) const { return std::round((kL + x_.unit(x) * pw()) * 100.0) / 100.0; }
  double sy(double y) const { return std::round((kT + (1.0 - y_.unit(y)) * ph()) * 100.0) / 100.0; }
  bool visible(const Point& p) const {
    if ((x_.log && !(p.x > 0.0)) || (y_.log && !(p.y > 0.0))) return false;
    return std::isfinite(p.x) && std::isfinite(p.y);
  }
  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '<') out += "&lt;";
      else if (c == '>') out += "&gt;";
      else if (c == '&') out += "&amp;";
      else out += c;
    }
    return out;
  }

  std::string title_;
  Axis x_, y_;
  std::vector<Series> series_;
  std::vector<VLine> vlines_;
};

// Groups rows by the values of the given columns, in first-seen order.
inline std::vector<std::pair<std::string, std::vector<std::size_t>>> group_rows(
    const CsvTable& t, const std::vector<std::string>& keys) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::string name;
    for (const auto& k : keys) {
      if (!name.empty()) name += ' ';
      name += k + "=" + t.text(r, k);
    }
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == name; });
    if (it == groups.end()) {
      groups.push_back({name, {}});
      it = std::prev(groups.end());
    }
    it->second.push_back(r);
  }
  return groups;
}

inline std::string id_of(const std::string& name) {
  std::string id = "series";
  for (char c : name) id += std::isalnum(static_cast<unsigned char>(c)) ? c : '-';
  return id;
}

// One series per group; x sorted ascending.
inline std::vector<Series> grouped_series(const CsvTable& t, const std::vector<std::string>& keys, const std::string& xcol,
                                          const std::string& ycol, const std::string& ecol) {
  std::vector<Series> out;
  for (const auto& [name, rows] : group_rows(t, keys)) {
    Series s{name, id_of(name), {}};
    for (auto r : rows) s.points.push_back({t.number(r, xcol), t.number(r, ycol), t.number(r, ecol)});
    std::sort(s.points.begin(), s.points.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<double> column_values(const CsvTable& t, const std::string& col) {
  std::vector<double> v;
  for (std::size_t r = 0; r < t.rows.size(); ++r) v.push_back(t.number(r, col));
  return v;
}

}  // namespace svg

/// Renders the CSV as SVG. `kind`, when given, must match the schema line.
inline std::string plot_csv(const CsvTable& t, const std::string& kind = {}) {
  if (!kind.empty() && kind != t.kind) throw PlotError("schema mismatch: CSV holds " + t.kind + ", expected " + kind);
  std::vector<std::string> expected;
  try {
    expected = csv_header(t.kind);
  } catch (const ConfigError&) {
    throw PlotError("unknown schema '" + t.kind + "'");
  }
  if (t.header != expected) throw PlotError("schema mismatch: header does not match " + t.kind + "/v1");
  if (t.rows.empty()) throw PlotError("CSV has no data rows");
  using namespace svg;

  if (t.kind == "theta-scan") {
    auto ys = column_values(t, "estimate");
    ys.push_back(0.0);
    ys.push_back(1.0);
    auto xs = column_values(t, "beta");
    xs.push_back(1.0);
    Axis xa = fit_axis(xs, false, "beta");
    Axis ya{0.0, 1.05, false, "theta_hat = P[0 <-> outside B_L]"};
    Figure f("theta scan", xa, ya);
    f.vline(1.0, "ref-beta-1", "beta = 1");
    for (auto& s : grouped_series(t, {"L", "lambda", "q"}, "beta", "estimate", "stderr")) f.add(std::move(s));
    Series curve{"beta theta^2 = 1", "ref-beta-theta2", {}, false, true};
    const double x0 = std::max(1.0 / (ya.hi * ya.hi), xa.lo);
    for (int k = 0; k <= 100; ++k) {
      const double b = x0 + (xa.hi - x0) * k / 100.0;
      curve.points.push_back({b, 1.0 / std::sqrt(b)});
    }
    f.add(std::move(curve));
    return f.render();
  }
  if (t.kind == "multiscale") {
    std::vector<double> ys = column_values(t, "u_hat");
    for (double v : column_values(t, "target")) ys.push_back(v);
    Figure f("multiscale recursion", fit_axis(column_values(t, "n"), false, "level n"), fit_axis(ys, true, "u_n"));
    Series u{"u_hat", "u_hat", {}};
    Series target{"C_n^-2 / 400", "target", {}, true, true};
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      u.points.push_back({t.number(r, "n"), t.number(r, "u_hat"), t.number(r, "stderr")});
      target.points.push_back({t.number(r, "n"), t.number(r, "target")});
    }
    f.add(std::move(u));
    f.add(std::move(target));
    return f.render();
  }
  if (t.kind == "pbar" || t.kind == "p-bad") {
    const bool bad = t.kind == "p-bad";
    const std::string ycol = bad ? "p_hat" : "estimate";
    Figure f(bad ? "P[B_K is theta-bad]" : "pbar(K)", fit_axis(column_values(t, "K"), true, "K"),
             fit_axis(column_values(t, ycol), true, bad ? "p_bad" : "pbar"));
    const std::vector<std::string> keys = bad ? std::vector<std::string>{"theta", "beta", "lambda"}
                                              : std::vector<std::string>{"beta", "lambda"};
    for (auto& s : grouped_series(t, keys, "K", ycol, "stderr")) f.add(std::move(s));
    return f.render();
  }
  if (t.kind == "fk-theta" || t.kind == "magnetization") {
    Figure f(t.kind == "fk-theta" ? "theta_fk vs L" : "magnetization vs L", fit_axis(column_values(t, "L"), true, "L"),
             fit_axis(column_values(t, "estimate"), true, t.kind));
    for (auto& s : grouped_series(t, {"q", "beta", "lambda"}, "L", "estimate", "stderr")) f.add(std::move(s));
    return f.render();
  }
  throw PlotError("no plot is defined for " + t.kind);
}

/// Reads csv_path and writes the SVG; on any error no file is created.
inline void plot_file(const std::string& csv_path, const std::string& svg_path, const std::string& kind = {}) {
  const auto svg = plot_csv(read_csv(csv_path), kind);
  write_text_file(svg_path, svg);
}

}  // namespace lrperc
