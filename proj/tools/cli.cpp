#include "cli.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <regex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "geoscope/geometry.hpp"
#include "geoscope/kostant.hpp"
#include "geoscope/stabilization.hpp"
#include "geoscope/version.hpp"

namespace geoscope::cli {

using json = nlohmann::ordered_json;

namespace {

double parse_number(const std::string& text, const std::string& what) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  while (end && (*end == ' ' || *end == '\t')) ++end;
  if (end == begin || *end != '\0') throw UsageError("invalid number '" + text + "' in " + what);
  return value;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int max_order_for(const Chart& chart, const Options& opts) {
  return opts.max_order ? *opts.max_order : default_max_order(chart.dim());
}

int tower_depth_for(const Chart& chart, const Options& opts) {
  return opts.tower_depth ? *opts.tower_depth : stabilization_cap(chart.dim()) + 1;
}

json config_json(const Chart& chart, const std::string& chart_path, const Options& opts) {
  json c;
  c["chart"] = chart_path;
  c["max_order"] = max_order_for(chart, opts);
  c["max_valence"] = opts.max_valence;
  c["tower_depth"] = tower_depth_for(chart, opts);
  c["rank_tol"] = opts.rank_tol;
  c["steps"] = opts.steps;
  c["probe_step"] = opts.probe_step;
  c["check_step"] = opts.check_step;
  return c;
}

json element_json(const KostantElement& e) {
  json B = json::array();
  for (Eigen::Index i = 0; i < e.B.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < e.B.cols(); ++j) row.push_back(e.B(i, j));
    B.push_back(row);
  }
  json v = json::array();
  for (Eigen::Index i = 0; i < e.v.size(); ++i) v.push_back(e.v(i));
  return json{{"v", v}, {"B", B}};
}

Eigen::VectorXd axis(int n, int i) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(i) = 1.0;
  return e;
}

struct PointAnalysis {
  std::vector<double> invariant_values;
  StabilizationReport report;
  CohomogeneityResult cohomogeneity;
  double flatness = 0.0;
  double parallelness = 0.0;
};

PointAnalysis analyze_point(const Chart& chart, std::span<const double> point, const InvariantSet& set,
                            const Options& opts) {
  const int n = chart.dim();
  if (static_cast<int>(point.size()) != n) throw UsageError("point needs " + std::to_string(n) + " coordinates");
  PointAnalysis a;
  a.invariant_values = invariant_values(set, chart, point);
  a.cohomogeneity = cohomogeneity_at(chart, point, set, opts.rank_tol, opts.probe_step);
  a.report = stabilize(chart, point, opts.rank_tol, tower_depth_for(chart, opts));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      a.flatness = std::max(a.flatness, flatness_check(chart, point, a.report, axis(n, i), axis(n, j)));
    }
    a.parallelness =
        std::max(a.parallelness, parallelness_check(chart, point, a.report, axis(n, i), opts.check_step, opts.steps));
  }
  return a;
}

bool is_degenerate(const Chart& chart, std::span<const double> point) {
  try {
    metric_at(chart, point, 0);
    return false;
  } catch (const DomainError&) {
    return true;
  } catch (const NumericalError&) {
    return true;
  }
}

}  // namespace

std::vector<double> parse_point(std::string_view text, int dim) {
  std::vector<double> out;
  std::string item;
  std::stringstream in{std::string(text)};
  while (std::getline(in, item, ',')) out.push_back(parse_number(item, "point"));
  if (static_cast<int>(out.size()) != dim) {
    throw UsageError("point '" + std::string(text) + "' has " + std::to_string(out.size()) +
                     " coordinates, chart dimension is " + std::to_string(dim));
  }
  return out;
}

Grid parse_grid(std::string_view text, int dim) {
  const std::string s(text);
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) throw UsageError("grid spec needs ':' before the node counts: " + s);
  const std::string ranges = s.substr(0, colon);
  const std::string counts = s.substr(colon + 1);

  static const std::regex interval(R"(\[\s*([^,\]]+?)\s*,\s*([^\]]+?)\s*\])");
  std::vector<std::pair<double, double>> bounds;
  std::size_t consumed = 0;
  for (auto it = std::sregex_iterator(ranges.begin(), ranges.end(), interval); it != std::sregex_iterator(); ++it) {
    const std::string gap = ranges.substr(consumed, static_cast<std::size_t>(it->position()) - consumed);
    if (gap != (bounds.empty() ? "" : "x")) throw UsageError("malformed grid ranges: " + ranges);
    bounds.emplace_back(parse_number((*it)[1], "grid"), parse_number((*it)[2], "grid"));
    consumed = static_cast<std::size_t>(it->position() + it->length());
  }
  if (consumed != ranges.size() || bounds.empty()) throw UsageError("malformed grid ranges: " + ranges);

  std::vector<int> sizes;
  std::string item;
  std::stringstream in(counts);
  while (std::getline(in, item, 'x')) {
    const double c = parse_number(item, "grid counts");
    if (c < 1 || c != static_cast<int>(c)) throw UsageError("grid counts must be positive integers: " + counts);
    sizes.push_back(static_cast<int>(c));
  }
  if (sizes.size() != bounds.size()) throw UsageError("grid has " + std::to_string(bounds.size()) +
                                                      " ranges but " + std::to_string(sizes.size()) + " counts");
  if (static_cast<int>(sizes.size()) != dim) {
    throw UsageError("grid has " + std::to_string(sizes.size()) + " axes, chart dimension is " + std::to_string(dim));
  }
  Grid grid;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] > 1 && !(bounds[i].second > bounds[i].first)) throw UsageError("grid range needs min < max");
    grid.axes.push_back({bounds[i].first, bounds[i].second, sizes[i]});
  }
  return grid;
}

std::string analyze(const Chart& chart, const std::string& chart_path, std::span<const double> point,
                    const Options& opts) {
  const InvariantSet set = enumerate_patterns(chart.dim(), max_order_for(chart, opts), opts.max_valence);
  const PointAnalysis a = analyze_point(chart, point, set, opts);
  const StabilizationReport& r = a.report;

  json out;
  out["tool"] = "geoscope";
  out["version"] = kVersion;
  out["command"] = "analyze";
  json config = config_json(chart, chart_path, opts);
  config["point"] = std::vector<double>(point.begin(), point.end());
  out["config"] = config;
  out["dim"] = chart.dim();
  out["point"] = std::vector<double>(point.begin(), point.end());
  json inv = json::object();
  for (std::size_t i = 0; i < set.patterns.size(); ++i) inv[set.patterns[i].descriptor()] = a.invariant_values[i];
  out["invariants"] = inv;
  out["dims"] = r.dims;
  out["singer_invariant"] = r.singer_invariant;
  out["killing_dim"] = r.killing_dim();
  out["orbit_dim"] = r.orbit_dim;
  out["isotropy_dim"] = r.isotropy_dim;
  out["homogeneous"] = r.homogeneous;
  out["cohomogeneity"] = a.cohomogeneity.generic_codim;
  out["cohomogeneity_at_point"] = a.cohomogeneity.codim;
  out["regular"] = !a.cohomogeneity.singular;
  json basis = json::array();
  for (const auto& p : a.cohomogeneity.rank_basis) basis.push_back(p.descriptor());
  out["rank_basis"] = basis;
  out["residuals"] = json{{"flatness_max", a.flatness}, {"parallelness_max", a.parallelness}};
  json stable = json::array();
  for (const auto& e : r.stable_basis) stable.push_back(element_json(e));
  out["stable_basis"] = stable;
  out["singular_values"] = r.singular_values;
  return out.dump(2) + "\n";
}

std::string scan(const Chart& chart, const std::string& chart_path, const Grid& grid, const std::string& grid_text,
                 const Options& opts) {
  (void)chart_path;
  (void)grid_text;
  const int n = chart.dim();
  const InvariantSet set = enumerate_patterns(n, max_order_for(chart, opts), opts.max_valence);
  const std::size_t count = grid.node_count();
  std::vector<std::string> rows(count);

  auto run = [&](std::size_t k) {
    const Eigen::VectorXd p = grid.node(k);
    std::ostringstream row;
    row << k;
    for (int i = 0; i < n; ++i) row << "," << fmt(p(i));
    if (is_degenerate(chart, as_span(p))) {
      row << ",degenerate,,,,,,,,,";
      rows[k] = row.str();
      return;
    }
    try {
      const PointAnalysis a = analyze_point(chart, as_span(p), set, opts);
      const auto& r = a.report;
      std::string dims;
      for (std::size_t i = 0; i < r.dims.size(); ++i) dims += (i ? ";" : "") + std::to_string(r.dims[i]);
      row << ",ok," << r.killing_dim() << "," << r.singer_invariant << "," << r.orbit_dim << "," << r.isotropy_dim
          << "," << a.cohomogeneity.generic_codim << "," << (a.cohomogeneity.singular ? 0 : 1) << ","
          << (r.homogeneous ? 1 : 0) << "," << dims << "," << fmt(a.flatness) << "," << fmt(a.parallelness);
    } catch (const StabilizationError&) {
      row << ",unstable,,,,,,,,,";
    } catch (const DomainError&) {
      row << ",degenerate,,,,,,,,,";
    } catch (const NumericalError&) {
      row << ",failed,,,,,,,,,";
    }
    rows[k] = row.str();
  };

  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(count)));
  if (jobs == 1) {
    for (std::size_t k = 0; k < count; ++k) run(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (int j = 0; j < jobs; ++j) {
      workers.emplace_back([&] {
        for (std::size_t k = next++; k < count; k = next++) run(k);
      });
    }
    for (auto& w : workers) w.join();
  }

  std::ostringstream out;
  out << "index";
  for (int i = 1; i <= n; ++i) out << ",coord_" << i;
  out << ",status,killing_dim,singer_invariant,orbit_dim,isotropy_dim,cohomogeneity,regular,homogeneous,dims,"
         "flatness_max,parallelness_max\n";
  for (const auto& r : rows) out << r << "\n";
  return out.str();
}

ExtendOutput extend(const Chart& chart, const std::string& chart_path, std::span<const double> base, int element,
                    const Grid& grid, const std::string& grid_text, const Options& opts) {
  const int n = chart.dim();
  if (static_cast<int>(base.size()) != n) throw UsageError("base point needs " + std::to_string(n) + " coordinates");
  const StabilizationReport r = stabilize(chart, base, opts.rank_tol, tower_depth_for(chart, opts));
  const int size = static_cast<int>(r.stable_basis.size());
  if (element < 0 || element >= size) {
    throw UsageError("element index " + std::to_string(element) + " out of range: stable basis has " +
                     std::to_string(size) + " element" + (size == 1 ? "" : "s"));
  }
  const KostantElement& e0 = r.stable_basis[static_cast<std::size_t>(element)];
  const Eigen::VectorXd base_vec = Eigen::Map<const Eigen::VectorXd>(base.data(), n);
  const FieldSample sample = extend_killing(chart, base_vec, e0, grid, opts.steps);
  const InvariantSet set = enumerate_patterns(n, max_order_for(chart, opts), opts.max_valence);
  const KillingResidual res = killing_residual(chart, sample, set);

  Eigen::VectorXd corner(n);
  for (int i = 0; i < n; ++i) corner(i) = grid.axes[i].max;
  const double deviation = path_independence(chart, base_vec, e0, corner, opts.steps);

  json out;
  out["tool"] = "geoscope";
  out["version"] = kVersion;
  out["command"] = "extend";
  json config = config_json(chart, chart_path, opts);
  config["base"] = std::vector<double>(base.begin(), base.end());
  config["element"] = element;
  config["grid"] = grid_text;
  out["config"] = config;
  out["dim"] = n;
  out["stable_dim"] = size;
  out["element"] = element_json(e0);
  out["nodes"] = sample.values.size();
  out["residuals"] = json{{"max_sym_residual", res.max_sym_residual},
                          {"max_tangency_residual", res.max_tangency_residual},
                          {"max_invariant_gradient", res.max_invariant_gradient}};
  out["path_independence"] = json{{"target", std::vector<double>(corner.data(), corner.data() + n)},
                                  {"deviation", deviation}};

  std::ostringstream csv;
  write_csv(csv, sample);
  return {out.dump(2) + "\n", csv.str()};
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DomainError*>(&e) || dynamic_cast<const NumericalError*>(&e)) return 2;
  return 1;
}

}  // namespace geoscope::cli
