// lrperc: run a configured experiment or plot its CSV.
//
//   lrperc <kind> --config <file> [--threads N] [--out DIR]
//   lrperc plot <csv> [--kind KIND] [--out FILE.svg]
//
// Exit codes: 0 ok, 2 invalid config or input, 3 resource cap, 4 I/O.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lrperc/experiments.hpp"
#include "lrperc/svg_plot.hpp"

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitResource = 3;
constexpr int kExitIo = 4;

int run_kind(const std::string& kind, const std::string& config_path, unsigned threads, const std::string& out_dir) {
  auto config = lrperc::load_experiment_config(config_path, kind);
  lrperc::apply_seed_override(config, std::getenv("LRPERC_SEED"));
  lrperc::worker_threads() = threads;
  const auto out = lrperc::run_experiment(config);
  const auto csv = lrperc::write_outputs(out_dir, config, out, threads);
  std::cerr << "wrote " << out.rows.size() << " rows to " << csv.string() << "\n";
  return 0;
}

int run_plot(const std::string& csv_path, const std::string& kind, std::string svg_path) {
  if (svg_path.empty()) svg_path = std::filesystem::path(csv_path).replace_extension(".svg").string();
  lrperc::plot_file(csv_path, svg_path, kind);
  std::cerr << "wrote " << svg_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-range percolation and Potts experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  unsigned threads = 1;
  std::string chosen;
  for (const auto& kind : lrperc::experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    sub->add_option("--config", config_path, "key = value config file")->required();
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
    sub->add_option("--out", out_dir, "output directory");
    sub->callback([&chosen, kind] { chosen = kind; });
  }

  std::string csv_path, plot_kind, svg_path;
  auto* plot = app.add_subcommand("plot", "render an experiment CSV as SVG");
  plot->add_option("csv", csv_path, "CSV written by an experiment")->required();
  plot->add_option("--kind", plot_kind, "expected schema kind");
  plot->add_option("--out", svg_path, "SVG path (default: CSV path with .svg)");
  plot->callback([&chosen] { chosen = "plot"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (chosen == "plot") return run_plot(csv_path, plot_kind, svg_path);
    return run_kind(chosen, config_path, threads, out_dir);
  } catch (const lrperc::ResourceError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return kExitResource;
  } catch (const lrperc::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const lrperc::PlotError& e) {
    std::cerr << "plot error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
