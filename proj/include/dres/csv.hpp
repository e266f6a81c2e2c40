#pragma once

#include "dres/experiments.hpp"
#include "dres/normal_form.hpp"
#include "dres/phase_space.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace dres {

using Cell = std::variant<double, std::int64_t, std::string>;

/// Column names carry their unit in brackets when not dimensionless, e.g. "delta[rad/turn]".
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

/// Doubles at full precision (%.17g), so equal tables give identical files.
std::string to_csv(const Table& table);
/// Throws std::runtime_error naming the path on I/O failure.
void emit_csv(const Table& table, const std::filesystem::path& path);

/// Minimal reader for files written by emit_csv (no quoting).
Table read_csv(const std::filesystem::path& path);
double cell_as_double(const Cell& c);

Table areas_table(std::span<const RegionAreas> areas);
Table trap_table(std::string_view key, std::span<const double> keys, std::span<const TrapReport> reports);
Table fixed_points_table(std::span<const double> delta_hats, std::span<const FixedPointSet> sets);
Table label_grid_table(double delta_hat, const LabelGrid& grid);
Table histogram_table(std::span<const HistogramRow> rows);
Table scan_table(ScanAxis axis, std::span<const ScanRow> rows);
Table compare_table(std::span<const CompareRow> rows);

struct ProbabilityRow {
  double a_min = 0, a_max = 0;
  CrossingPrediction prediction;
  double epsilon = 0;
};
Table probability_table(std::span<const ProbabilityRow> rows);

}  // namespace dres
