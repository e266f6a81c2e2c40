#pragma once

// Static SVG figures built from the CSV tables, so a plot can always be regenerated from
// the canonical output.

#include "dres/csv.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace dres {

enum class PlotKind { Portrait, Areas, Probability, Histogram, Scan, Compare };

std::string_view to_string(PlotKind k);
/// Throws DomainError on an unknown name.
PlotKind plot_kind_from_string(std::string_view name);

/// Fixed region palette shared by every figure.
std::string_view region_color(RegionLabel l);

/// Expected tables:
///   portrait     label_grid_table rows, one panel per delta_hat
///   areas        areas_table, areas and East share against delta_hat
///   probability  probability_table, optionally joined with measured "F_<region>" columns
///   histogram    histogram_table, stacked fractions per amplitude bin
///   scan         scan_table, one panel per axis on a 2 x 3 layout
///   compare      compare_table, exciter and Henon island fractions against J_avg
std::string render_plot(const Table& table, PlotKind kind);
void emit_plot(const Table& table, PlotKind kind, const std::filesystem::path& path);

}  // namespace dres
