#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"
#include "geoscope/version.hpp"

namespace {

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw geoscope::IoError("cannot open output file: " + path);
  out << text;
  if (!out) throw geoscope::IoError("failed writing output file: " + path);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace geoscope;
  CLI::App app{"Local isometry analysis of Riemannian metrics given in coordinates", "geoscope"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  cli::Options opts;
  std::string chart_path, point_text, grid_text, base_text, out_path, csv_path;
  int element = 0;
  int max_order = -1;
  int tower_depth = -1;

  auto common = [&](CLI::App* sub) {
    sub->add_option("chart", chart_path, "Chart file")->required();
    sub->add_option("--max-order", max_order, "Largest total derivative order of invariants (default n(n-1)/2, at most 4)");
    sub->add_option("--max-valence", opts.max_valence, "Largest number of slots per invariant")->capture_default_str();
    sub->add_option("--tower-depth", tower_depth, "Deepest covariant derivative of R used by stabilization");
    sub->add_option("--rank-tol", opts.rank_tol, "Relative singular value threshold")->capture_default_str();
    sub->add_option("--steps", opts.steps, "Transport steps (per segment or per grid cell)")->capture_default_str();
    sub->add_option("--probe-step", opts.probe_step, "Offset of cohomogeneity probe points")->capture_default_str();
    sub->add_option("--check-step", opts.check_step, "Step of the parallelness check")->capture_default_str();
    sub->add_option("--out", out_path, "Write the report here instead of stdout");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "Report curvature, invariants and Killing data at a point");
  common(analyze);
  analyze->add_option("--point", point_text, "Comma-separated coordinates")->required();

  CLI::App* scan = app.add_subcommand("scan", "Analyze every node of a grid, CSV output");
  common(scan);
  scan->add_option("--grid", grid_text, "Grid spec such as [-1,1]x[-1,1]:5x5")->required();
  scan->add_option("--jobs", opts.jobs, "Worker threads")->capture_default_str();

  CLI::App* extend = app.add_subcommand("extend", "Extend a stable element to a grid by parallel transport");
  common(extend);
  extend->add_option("--base", base_text, "Comma-separated base point")->required();
  extend->add_option("--element", element, "Index into the stable basis at the base point")->capture_default_str();
  extend->add_option("--grid", grid_text, "Grid spec such as [-1,1]x[-1,1]:9x9")->required();
  extend->add_option("--csv", csv_path, "Write the sampled section as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (max_order >= 0) opts.max_order = max_order;
    if (tower_depth >= 0) opts.tower_depth = tower_depth;
    if (opts.steps < 1) throw cli::UsageError("--steps must be at least 1");
    if (opts.max_valence < 4 || opts.max_valence % 2 != 0) throw cli::UsageError("--max-valence must be even and >= 4");
    const Chart chart = Chart::load(chart_path);
    if (analyze->parsed()) {
      const auto point = cli::parse_point(point_text, chart.dim());
      emit(cli::analyze(chart, chart_path, point, opts), out_path);
    } else if (scan->parsed()) {
      const Grid grid = cli::parse_grid(grid_text, chart.dim());
      emit(cli::scan(chart, chart_path, grid, grid_text, opts), out_path);
    } else if (extend->parsed()) {
      const auto base = cli::parse_point(base_text, chart.dim());
      const Grid grid = cli::parse_grid(grid_text, chart.dim());
      const auto result = cli::extend(chart, chart_path, base, element, grid, grid_text, opts);
      if (!csv_path.empty()) emit(result.csv, csv_path);
      emit(result.summary, out_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "geoscope: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
  return 0;
}
