#include "dres/phase_space.hpp"

#include "dres/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dres {

double RegionAreas::island_sum() const {
  double s = 0;
  for (RegionLabel l : kIslands) s += area[idx(l)];
  return s;
}

double RegionAreas::bounded_sum() const { return island_sum() + area[idx(RegionLabel::Core)]; }

double RegionAreas::east_share() const {
  const double s = island_sum();
  return s > 0 ? area[idx(RegionLabel::East)] / s : std::numeric_limits<double>::quiet_NaN();
}

HamiltonianParams<double> hamiltonian_for(const MapParams<double>& params) {
  return HamiltonianParams<double>::from_kappa(params.delta, params.epsilon, params.kappa, params.psi0);
}

double classification_window(const MapParams<double>& params, double window_factor) {
  double extent = 0;
  try {
    extent = structure_extent(hamiltonian_for(params));
  } catch (const NumericalError&) {
    extent = 0;
  }
  if (!(extent > 0) || !std::isfinite(extent))
    throw ResolutionError("no island structure to size the classification window; set the half-width explicitly");
  return std::min(window_factor * kHamiltonianToMap * extent, params.escape_radius);
}

LabelGrid classify_grid(const MapParams<double>& params, const GridSpec& spec) {
  if (spec.resolution < 2) throw DomainError("grid resolution must be at least 2");
  LabelGrid grid;
  grid.resolution = spec.resolution;
  grid.half_width = spec.half_width > 0 ? spec.half_width : classification_window(params, spec.window_factor);
  const FrozenMap<double> map(params);
  const int n = spec.resolution;
  grid.labels.assign(static_cast<std::size_t>(n) * n, RegionLabel::External);
  grid.indeterminate.assign(grid.labels.size(), 0);
  parallel_for(static_cast<std::size_t>(n), spec.threads, [&](std::size_t row) {
    std::vector<ParticleState<double>> starts;
    starts.reserve(n);
    for (int col = 0; col < n; ++col) starts.push_back(grid.centre(static_cast<int>(row), col));
    const auto res = classify_batch(starts, map, spec.classifier, kSectionPhase);
    for (int col = 0; col < n; ++col) {
      grid.labels[row * n + col] = res[col].label;
      grid.indeterminate[row * n + col] = res[col].indeterminate;
    }
  });
  return grid;
}

RegionAreas areas_from_grid(const LabelGrid& grid, const MapParams<double>& params, const GridSpec& spec) {
  RegionAreas a;
  const int n = grid.resolution;
  a.resolution = n;
  a.half_width = grid.half_width;
  a.cell_area = grid.cell_size() * grid.cell_size();
  a.n_turns = spec.classifier.n_turns;
  a.min_island_cells = spec.min_island_cells;
  a.params = params;
  RegionArray<std::int64_t> boundary{};
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const RegionLabel l = grid.at(r, c);
      ++a.cells[idx(l)];
      a.indeterminate_cells += grid.indeterminate[static_cast<std::size_t>(r) * n + c];
      const bool edge = (r > 0 && grid.at(r - 1, c) != l) || (r + 1 < n && grid.at(r + 1, c) != l) ||
                        (c > 0 && grid.at(r, c - 1) != l) || (c + 1 < n && grid.at(r, c + 1) != l);
      if (edge) {
        ++boundary[idx(l)];
        ++a.boundary_cells;
      }
    }
  }
  for (std::size_t k = 0; k < kRegionCount; ++k) {
    a.area[k] = static_cast<double>(a.cells[k]) * a.cell_area;
    a.error_bound[k] = static_cast<double>(boundary[k]) * a.cell_area;
  }
  a.area[idx(RegionLabel::External)] = std::numeric_limits<double>::infinity();
  a.error_bound[idx(RegionLabel::External)] = std::numeric_limits<double>::quiet_NaN();
  a.total_error_bound = static_cast<double>(a.boundary_cells) * a.cell_area;
  return a;
}

RegionAreas measure_areas(const MapParams<double>& params, const GridSpec& spec) {
  const LabelGrid grid = classify_grid(params, spec);
  RegionAreas a = areas_from_grid(grid, params, spec);
  if (spec.check_resolution) {
    for (RegionLabel l : kIslands) {
      if (!a.present(l)) continue;
      if (a.error_bound[idx(l)] > spec.max_relative_error * a.area[idx(l)]) {
        std::ostringstream msg;
        msg << "grid too coarse: " << to_string(l) << " area " << a.area[idx(l)] << " has error bound "
            << a.error_bound[idx(l)] << " at resolution " << spec.resolution;
        throw ResolutionError(msg.str());
      }
    }
  }
  return a;
}

AreaDerivatives area_derivatives(const MapParams<double>& params, double delta_step, const GridSpec& grid) {
  if (!(delta_step > 0)) throw DomainError("delta step must be positive");
  MapParams<double> lo = params, hi = params;
  lo.delta -= delta_step;
  hi.delta += delta_step;
  if (params.epsilon > 0 && params.kappa > 0 && params.kappa < 1) {
    const double unit = std::pow(params.epsilon, 2.0 / 3.0);
    if (topology_for(lo.delta / unit, params.kappa) != topology_for(hi.delta / unit, params.kappa))
      throw StraddleError("topology changes inside the finite-difference stencil");
  }
  GridSpec g = grid;
  if (g.half_width <= 0) g.half_width = classification_window(hi, g.window_factor);
  AreaDerivatives d;
  d.minus = measure_areas(lo, g);
  d.plus = measure_areas(hi, g);
  for (std::size_t k = 0; k < kRegionCount; ++k) {
    d.d_area[k] = (d.plus.area[k] - d.minus.area[k]) / (2 * delta_step);
    d.error[k] = (d.plus.error_bound[k] + d.minus.error_bound[k]) / (2 * delta_step);
  }
  d.d_area[idx(RegionLabel::External)] = std::numeric_limits<double>::quiet_NaN();
  return d;
}

double xi(std::span<const double> derivs, std::size_t target, std::span<const std::size_t> growing) {
  if (target >= derivs.size()) throw DomainError("target region out of range");
  double denom = 0;
  for (std::size_t g : growing) {
    if (g >= derivs.size()) throw DomainError("growing region out of range");
    denom += derivs[g];
  }
  if (!(denom > 0)) throw UndefinedCrossing("sum of growing-region derivatives is not positive");
  return derivs[target] / denom;
}

double xi(const RegionArray<double>& derivs, RegionLabel target, std::span<const RegionLabel> growing) {
  std::vector<std::size_t> g;
  for (RegionLabel l : growing) g.push_back(idx(l));
  return xi(derivs, idx(target), g);
}

double trap_probability(double x) { return std::clamp(x, 0.0, 1.0); }

AreaTable area_table(const MapParams<double>& base, std::span<const double> deltas, const GridSpec& grid) {
  AreaTable t;
  GridSpec g = grid;
  if (g.half_width <= 0) {
    MapParams<double> widest = base;
    widest.delta = *std::max_element(deltas.begin(), deltas.end());
    g.half_width = classification_window(widest, g.window_factor);
  }
  for (double d : deltas) {
    MapParams<double> p = base;
    p.delta = d;
    t.delta.push_back(d);
    t.areas.push_back(measure_areas(p, g));
  }
  return t;
}

CrossingPrediction predict_crossing(const AreaTable& table, double action, int fit_rows) {
  CrossingPrediction out;
  out.probability[idx(RegionLabel::External)] = 1;
  const double target = kTwoPi<double> * action;
  const std::size_t n = table.delta.size();
  if (n < 2) throw DomainError("area table needs at least two rows");
  if (fit_rows < 1) throw DomainError("fit_rows must be at least 1");
  for (std::size_t i = 1; i < n; ++i) {
    const double a0 = table.areas[i - 1].bounded_sum();
    const double a1 = table.areas[i].bounded_sum();
    if (!(a0 < target && target <= a1) && !(i == 1 && target <= a0)) continue;
    if (target <= a0) {
      out.delta = table.delta[0];
      out.extrapolated = true;
    } else {
      out.delta = table.delta[i - 1] + (target - a0) / (a1 - a0) * (table.delta[i] - table.delta[i - 1]);
    }
    out.crosses = true;
    // Least-squares slope over the rows around the crossing segment; single grids are noisy.
    const std::size_t lo = i - 1 >= static_cast<std::size_t>(fit_rows - 1) ? i - 1 - (fit_rows - 1) : 0;
    const std::size_t hi = std::min(n - 1, i + static_cast<std::size_t>(fit_rows - 1));
    double mean_d = 0;
    for (std::size_t r = lo; r <= hi; ++r) mean_d += table.delta[r];
    mean_d /= static_cast<double>(hi - lo + 1);
    double sdd = 0;
    for (std::size_t r = lo; r <= hi; ++r) sdd += (table.delta[r] - mean_d) * (table.delta[r] - mean_d);
    std::vector<RegionLabel> growing;
    for (std::size_t k = 0; k + 1 < kRegionCount; ++k) {
      double mean_a = 0, sda = 0;
      for (std::size_t r = lo; r <= hi; ++r) mean_a += table.areas[r].area[k];
      mean_a /= static_cast<double>(hi - lo + 1);
      for (std::size_t r = lo; r <= hi; ++r) sda += (table.delta[r] - mean_d) * (table.areas[r].area[k] - mean_a);
      out.d_area[k] = sda / sdd;
      if (out.d_area[k] > 0) growing.push_back(static_cast<RegionLabel>(k));
    }
    out.d_area[idx(RegionLabel::External)] = std::numeric_limits<double>::quiet_NaN();
    out.probability[idx(RegionLabel::External)] = 0;
    for (RegionLabel l : growing) out.probability[idx(l)] = trap_probability(xi(out.d_area, l, growing));
    return out;
  }
  return out;
}

}  // namespace dres
