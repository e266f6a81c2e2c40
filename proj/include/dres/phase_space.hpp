#pragma once

// Region areas of the frozen stroboscopic map, their detuning derivatives, and the
// separatrix-crossing probabilities built from them.

#include "dres/map_core.hpp"
#include "dres/normal_form.hpp"
#include "dres/tune.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace dres {

template <typename T>
using RegionArray = std::array<T, kRegionCount>;

inline std::size_t idx(RegionLabel l) { return static_cast<std::size_t>(l); }

struct GridSpec {
  int resolution = 300;        ///< cells per side
  double half_width = 0;       ///< window |x|,|p| <= half_width; 0 = automatic
  double window_factor = 1.5;  ///< automatic window: factor x outermost separatrix extent
  ClassifierConfig classifier{16384};
  bool check_resolution = true;
  double max_relative_error = 0.2;  ///< per-island error bound / area
  int min_island_cells = 25;        ///< fewer cells than this: island counted as absent
  unsigned threads = 0;
};

/// Labels of the grid cell centres, row-major with row 0 at p = +half_width.
struct LabelGrid {
  int resolution = 0;
  double half_width = 0;
  std::vector<RegionLabel> labels;
  std::vector<std::uint8_t> indeterminate;

  double cell_size() const { return 2 * half_width / resolution; }
  Vector2d centre(int row, int col) const {
    const double h = cell_size();
    return {-half_width + (col + 0.5) * h, half_width - (row + 0.5) * h};
  }
  RegionLabel at(int row, int col) const { return labels[static_cast<std::size_t>(row) * resolution + col]; }
};

struct RegionAreas {
  RegionArray<double> area{};         ///< External is +infinity (unbounded)
  RegionArray<double> error_bound{};  ///< cell area x boundary cells carrying the label
  RegionArray<std::int64_t> cells{};
  double total_error_bound = 0;  ///< cell area x all boundary cells
  std::int64_t boundary_cells = 0;
  std::int64_t indeterminate_cells = 0;
  int resolution = 0;
  double half_width = 0;
  double cell_area = 0;
  std::int64_t n_turns = 0;
  int min_island_cells = 0;
  MapParams<double> params;

  double operator[](RegionLabel l) const { return area[idx(l)]; }
  bool present(RegionLabel l) const { return cells[idx(l)] >= min_island_cells; }
  double island_sum() const;
  /// Area inside the outermost separatrix: islands plus core.
  double bounded_sum() const;
  /// East / (sum of islands).
  double east_share() const;
};

/// Hamiltonian model matching the map parameters (same delta, epsilon, kappa, psi0).
HamiltonianParams<double> hamiltonian_for(const MapParams<double>& params);

/// With the normal-form coefficients as given, the model's (X, Y) sit about sqrt(2) further
/// out than the corresponding map points on the section (its actions are twice the map's).
/// The topology in delta_hat is unaffected.
inline constexpr double kHamiltonianToMap = 0.70710678118654752;

/// Automatic classification half-width: window_factor x outermost separatrix extent,
/// converted to map coordinates.
double classification_window(const MapParams<double>& params, double window_factor = 1.5);

LabelGrid classify_grid(const MapParams<double>& params, const GridSpec& grid = {});
RegionAreas areas_from_grid(const LabelGrid& grid, const MapParams<double>& params, const GridSpec& spec);

/// Classifies every cell centre on the stroboscopic section and sums cell areas per label.
/// Throws ResolutionError when an island's error bound exceeds max_relative_error of its area.
RegionAreas measure_areas(const MapParams<double>& params, const GridSpec& grid = {});

struct AreaDerivatives {
  RegionArray<double> d_area{};  ///< dA/d(delta), External NaN
  RegionArray<double> error{};   ///< propagated grid error bound
  RegionAreas minus, plus;
};

/// Central difference of measure_areas in delta. Both stencil points must share the same
/// topology class (checked on the Hamiltonian model when epsilon > 0).
AreaDerivatives area_derivatives(const MapParams<double>& params, double delta_step, const GridSpec& grid = {});

/// xi = dA_target / sum_{growing} dA. Throws UndefinedCrossing on a non-positive denominator.
double xi(std::span<const double> derivs, std::size_t target, std::span<const std::size_t> growing);
double xi(const RegionArray<double>& derivs, RegionLabel target, std::span<const RegionLabel> growing);

/// Clamp of xi to [0, 1].
double trap_probability(double xi);

/// Areas on a grid of detuning values, used to locate separatrix crossings.
struct AreaTable {
  std::vector<double> delta;
  std::vector<RegionAreas> areas;
};

AreaTable area_table(const MapParams<double>& base, std::span<const double> deltas, const GridSpec& grid = {});

struct CrossingPrediction {
  bool crosses = false;     ///< false: the bounded area never reaches 2 pi J
  bool extrapolated = false;  ///< already inside at the first tabulated detuning
  double delta = 0;         ///< detuning at which the bounded area equals 2 pi J
  RegionArray<double> d_area{};
  RegionArray<double> probability{};  ///< capture probabilities, External is 1 without a crossing
};

/// Probabilities for a particle of action J swept by increasing delta: the crossing detuning
/// is where bounded_sum() = 2 pi J (linear interpolation in the table), the derivatives are
/// least-squares slopes over the segment containing it widened by fit_rows - 1 rows on each
/// side (fit_rows = 1: the bare segment), and the growing set is every bounded region with
/// positive slope.
CrossingPrediction predict_crossing(const AreaTable& table, double action, int fit_rows = 3);

}  // namespace dres
