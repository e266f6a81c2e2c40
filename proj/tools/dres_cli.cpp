// Command-line front end: one subcommand per study, CSV (and optionally SVG) into --out.

#include "dres/config.hpp"
#include "dres/csv.hpp"
#include "dres/experiments.hpp"
#include "dres/normal_form.hpp"
#include "dres/phase_space.hpp"
#include "dres/plot.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace dres;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Output {
  fs::path dir;
  bool plot = true;
  mutable std::vector<std::string> files;

  void write(const std::string& stem, const Table& t, std::optional<PlotKind> kind = std::nullopt) const {
    const fs::path csv = dir / (stem + ".csv");
    emit_csv(t, csv);
    files.push_back(csv.filename().string());
    std::cout << "wrote " << csv.string() << " (" << t.rows.size() << " rows)\n";
    if (plot && kind) {
      const fs::path svg = dir / (stem + ".svg");
      emit_plot(t, *kind, svg);
      files.push_back(svg.filename().string());
      std::cout << "wrote " << svg.string() << "\n";
    }
  }
};

std::vector<double> default_scan_grid(ScanAxis axis, const RunConfig& c) {
  switch (axis) {
    case ScanAxis::Epsilon: return {1e-6, 3e-6, 1e-5, 3e-5, 1e-4, 3e-4};
    case ScanAxis::Delta:
      return {kTwoPi<double> * 1e-4, kTwoPi<double> * 2e-4, kTwoPi<double> * 5e-4, kTwoPi<double> * 1e-3,
              kTwoPi<double> * 2e-3};
    case ScanAxis::N:
      return c.desk_scale ? std::vector<double>{1e3, 3e3, 1e4, 3e4} : std::vector<double>{3e3, 1e4, 3e4, 1e5};
    case ScanAxis::Kappa: return {0.05, 0.1, 0.2, 0.3, 0.5};
    case ScanAxis::Psi0: return {0, kPi<double> / 8, kPi<double> / 4, 3 * kPi<double> / 8, kPi<double> / 2};
    case ScanAxis::JAvg: return {0.002, 0.005, 0.01, 0.02, 0.05};
  }
  return {};
}

void run_portrait(const RunConfig& c, const Output& out) {
  Table all;
  for (double dh : c.delta_hat) {
    const LabelGrid g = classify_grid(c.map_params_scaled(dh), c.grid());
    Table t = label_grid_table(dh, g);
    if (all.header.empty()) all.header = t.header;
    for (auto& r : t.rows) all.rows.push_back(std::move(r));
  }
  if (all.header.empty()) all = label_grid_table(0, LabelGrid{});
  out.write("portrait", all, PlotKind::Portrait);
}

void run_fixed_points(const RunConfig& c, const Output& out) {
  std::vector<FixedPointSet> sets;
  for (double dh : c.delta_hat) sets.push_back(fixed_points(hamiltonian_for(c.map_params_scaled(dh))));
  out.write("fixed_points", fixed_points_table(c.delta_hat, sets));
  const CriticalDeltas cd = critical_deltas(c.kappa);
  Table crit;
  crit.header = {"kappa", "delta_hat_1", "delta_hat_2"};
  crit.add({c.kappa, cd.delta_hat_1, cd.delta_hat_2});
  out.write("critical", crit);
}

void run_areas(const RunConfig& c, const Output& out) {
  std::vector<double> deltas;
  const double unit = std::pow(c.epsilon, 2.0 / 3.0);
  for (double dh : c.delta_hat) deltas.push_back(dh * unit);
  const AreaTable t = area_table(c.map_params(0.0), deltas, c.grid());
  out.write("areas", areas_table(t.areas), PlotKind::Areas);
}

void run_probability(const RunConfig& c, const Output& out) {
  std::vector<double> deltas;
  const double unit = std::pow(c.epsilon, 2.0 / 3.0);
  for (double dh : c.table_delta_hat) deltas.push_back(dh * unit);
  const AreaTable table = area_table(c.map_params(0.0), deltas, c.grid());
  out.write("area_table", areas_table(table.areas), PlotKind::Areas);

  std::vector<ProbabilityRow> rows;
  const auto n_bins = static_cast<std::size_t>(std::ceil((c.amp_max - c.amp_min) / c.bin_width - 1e-9));
  for (std::size_t b = 0; b < n_bins; ++b) {
    ProbabilityRow r;
    r.a_min = c.amp_min + static_cast<double>(b) * c.bin_width;
    r.a_max = r.a_min + c.bin_width;
    r.epsilon = c.epsilon;
    // Mean action of an annulus uniform in J.
    r.prediction = predict_crossing(table, (r.a_min * r.a_min + r.a_max * r.a_max) / 4);
    rows.push_back(r);
  }
  Table t = probability_table(rows);
  if (c.measure) {
    const auto hist =
        amplitude_histogram(c.protocol(), c.amp_min, c.amp_max, c.bin_width, static_cast<std::size_t>(c.per_bin), c.seed);
    for (RegionLabel l : kAllRegions) t.header.push_back("F_" + std::string(to_string(l)));
    for (std::size_t i = 0; i < t.rows.size() && i < hist.size(); ++i)
      for (RegionLabel l : kAllRegions) t.rows[i].emplace_back(hist[i].report[l]);
  }
  out.write("probability", t, PlotKind::Probability);
}

void run_trap(const RunConfig& c, const Output& out) {
  const TrapReport r = run_trapping(c.distribution_spec(), c.protocol());
  const std::vector<double> key{c.distribution == DistributionKind::BivariateNormal ? c.J_avg
                                                                                    : (c.j_min + c.j_max) / 2};
  out.write("trap", trap_table("J_avg", key, std::span(&r, 1)));
  std::printf("islands %.4f  East share %.4f  escaped %.4f  (%.2f s)\n", r.island_fraction(), r.east_share,
              r.escaped_fraction, r.wall_seconds);
}

void run_histogram(const RunConfig& c, const Output& out) {
  const auto rows =
      amplitude_histogram(c.protocol(), c.amp_min, c.amp_max, c.bin_width, static_cast<std::size_t>(c.per_bin), c.seed);
  out.write("histogram", histogram_table(rows), PlotKind::Histogram);
}

void run_scan(const RunConfig& c, const Output& out) {
  std::vector<ScanAxis> axes;
  if (c.scan_axis == "all")
    axes = {ScanAxis::Epsilon, ScanAxis::Delta, ScanAxis::N, ScanAxis::Kappa, ScanAxis::Psi0, ScanAxis::JAvg};
  else
    axes = {scan_axis_from_string(c.scan_axis)};
  Table all;
  for (ScanAxis a : axes) {
    const auto grid = (axes.size() == 1 && !c.scan_values.empty()) ? c.scan_values : default_scan_grid(a, c);
    Table t = scan_table(a, parameter_scan(a, grid, c.study_defaults()));
    all.header = t.header;
    for (auto& r : t.rows) all.rows.push_back(std::move(r));
  }
  out.write("scan", all, PlotKind::Scan);
}

void run_compare(const RunConfig& c, const Output& out) {
  out.write("compare", compare_table(compare_henon(c.J_values, c.study_defaults())), PlotKind::Compare);
}

void dispatch(const RunConfig& c, const Output& out) {
  switch (c.study) {
    case StudyKind::Portrait: return run_portrait(c, out);
    case StudyKind::FixedPoints: return run_fixed_points(c, out);
    case StudyKind::Areas: return run_areas(c, out);
    case StudyKind::Probability: return run_probability(c, out);
    case StudyKind::Trap: return run_trap(c, out);
    case StudyKind::Histogram: return run_histogram(c, out);
    case StudyKind::Scan: return run_scan(c, out);
    case StudyKind::Compare: return run_compare(c, out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-resonance trapping studies for the Henon map with an exciter"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<bool> desk_scale;
  std::optional<unsigned> threads;
  bool no_plot = false;
  app.add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--desk-scale", desk_scale, "desk-scale defaults (true) or full scale (false)");
  app.add_option("--threads", threads, "worker threads, 0 = all cores");
  app.add_flag("--no-plot", no_plot, "write CSV only");
  for (const char* name :
       {"portrait", "fixed-points", "areas", "probability", "trap", "histogram", "scan", "compare"})
    app.add_subcommand(name, std::string("run the ") + name + " study");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  RunConfig config;
  try {
    std::vector<ConfigIssue> warnings;
    if (!config_path.empty()) config = load_config(config_path, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << (w.line ? "line " + std::to_string(w.line) + ": " : "")
                                             << w.key << ": " << w.message << "\n";
    config.study = study_from_string(app.get_subcommands().front()->get_name());
    if (!out_dir.empty()) config.out = out_dir;
    if (seed) config.seed = *seed;
    if (desk_scale) config.desk_scale = *desk_scale;
    if (threads) config.threads = *threads;
    config.validate();
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }

  try {
    Output out{config.out, !no_plot};
    fs::create_directories(out.dir);
    {
      std::ofstream f(out.dir / "config.ini");
      f << emit_config(config);
    }
    const auto t0 = std::chrono::steady_clock::now();
    dispatch(config, out);
    // Provenance next to the outputs; config.ini alone reproduces the run.
    nlohmann::json manifest{
        {"study", std::string(to_string(config.study))},
        {"seed", config.seed},
        {"desk_scale", config.desk_scale},
        {"N", config.effective_N()},
        {"particles", config.effective_particles()},
        {"threads", config.threads},
        {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
        {"config", "config.ini"},
        {"files", out.files},
    };
    std::ofstream(out.dir / "run.json") << manifest.dump(2) << "\n";
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
