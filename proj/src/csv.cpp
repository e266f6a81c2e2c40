#include "dres/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dres {

namespace {

std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (std::isnan(*d)) return "nan";
    if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

double scaled_delta(const MapParams<double>& p) {
  return p.epsilon > 0 ? p.delta / std::pow(p.epsilon, 2.0 / 3.0) : std::nan("");
}

void append_report(std::vector<Cell>& row, const TrapReport& r) {
  for (RegionLabel l : kAllRegions) row.emplace_back(r.fraction[idx(l)]);
  row.emplace_back(r.island_fraction());
  row.emplace_back(r.escaped_fraction);
  row.emplace_back(r.east_share);
  row.emplace_back(std::string(to_string(r.dominant)));
  row.emplace_back(r.dominant_share);
  row.emplace_back(r.indeterminate);
  row.emplace_back(r.particles);
  row.emplace_back(static_cast<std::int64_t>(r.seed));
}

void append_report_header(std::vector<std::string>& h, const std::string& prefix = "") {
  for (RegionLabel l : kAllRegions) h.push_back(prefix + std::string(to_string(l)));
  for (const char* c : {"islands", "escaped", "share", "dominant", "dominant_share", "indeterminate", "particles", "seed"})
    h.push_back(prefix + c);
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != header.size()) throw std::logic_error("table row width does not match header");
  rows.push_back(std::move(row));
}

std::string to_csv(const Table& table) {
  std::ostringstream out;
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
  return out.str();
}

void emit_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << to_csv(table);
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "'");
  Table t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    if (!s.empty() && s.back() == ',') parts.emplace_back();
    return parts;
  };
  if (!std::getline(f, line)) return t;
  t.header = split(line);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<Cell> row;
    for (auto& s : split(line)) row.emplace_back(s);
    t.rows.push_back(std::move(row));
  }
  return t;
}

double cell_as_double(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  return std::stod(std::get<std::string>(c));
}

Table areas_table(std::span<const RegionAreas> areas) {
  Table t;
  t.header = {"delta_hat", "A_East", "A_North", "A_West", "A_South", "A_Core", "err_bound",
              "delta[rad/turn]", "epsilon", "psi0[rad]", "resolution", "half_width", "n_turns",
              "indeterminate_cells"};
  for (const auto& a : areas) {
    t.add({scaled_delta(a.params), a[RegionLabel::East], a[RegionLabel::North], a[RegionLabel::West],
           a[RegionLabel::South], a[RegionLabel::Core], a.total_error_bound, a.params.delta, a.params.epsilon,
           a.params.psi0, static_cast<std::int64_t>(a.resolution), a.half_width, a.n_turns,
           a.indeterminate_cells});
  }
  return t;
}

Table trap_table(std::string_view key, std::span<const double> keys, std::span<const TrapReport> reports) {
  Table t;
  t.header = {std::string(key)};
  append_report_header(t.header);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::vector<Cell> row{i < keys.size() ? keys[i] : static_cast<double>(i)};
    append_report(row, reports[i]);
    t.add(std::move(row));
  }
  return t;
}

Table fixed_points_table(std::span<const double> delta_hats, std::span<const FixedPointSet> sets) {
  Table t;
  t.header = {"delta_hat", "topology", "family", "X", "Y", "J", "stability", "energy", "grad_norm"};
  for (std::size_t i = 0; i < sets.size(); ++i) {
    auto emit = [&](const std::vector<FixedPoint>& pts, const char* family) {
      for (const auto& f : pts)
        t.add({delta_hats[i], std::string(to_string(sets[i].topology)), std::string(family), f.position.x(),
               f.position.y(), f.action(), std::string(to_string(f.stability)), f.energy, f.gradient_norm});
    };
    emit(sets[i].on_axis, "on_axis");
    emit(sets[i].off_axis, "off_axis");
  }
  return t;
}

Table label_grid_table(double delta_hat, const LabelGrid& grid) {
  Table t;
  t.header = {"delta_hat", "row", "col", "x", "p", "label"};
  for (int r = 0; r < grid.resolution; ++r)
    for (int c = 0; c < grid.resolution; ++c) {
      const Vector2d q = grid.centre(r, c);
      t.add({delta_hat, static_cast<std::int64_t>(r), static_cast<std::int64_t>(c), q.x(), q.y(),
             std::string(to_string(grid.at(r, c)))});
    }
  return t;
}

Table histogram_table(std::span<const HistogramRow> rows) {
  Table t;
  t.header = {"a_min", "a_max"};
  append_report_header(t.header);
  for (const auto& r : rows) {
    std::vector<Cell> row{r.a_min, r.a_max};
    append_report(row, r.report);
    t.add(std::move(row));
  }
  return t;
}

Table scan_table(ScanAxis axis, std::span<const ScanRow> rows) {
  Table t;
  t.header = {"axis", "value"};
  append_report_header(t.header);
  for (const auto& r : rows) {
    std::vector<Cell> row{std::string(to_string(axis)), r.value};
    append_report(row, r.report);
    t.add(std::move(row));
  }
  return t;
}

Table compare_table(std::span<const CompareRow> rows) {
  Table t;
  t.header = {"J_avg", "islands_exciter", "islands_henon"};
  append_report_header(t.header, "exciter_");
  append_report_header(t.header, "henon_");
  for (const auto& r : rows) {
    std::vector<Cell> row{r.J_avg, r.exciter.island_fraction(), r.henon.island_fraction()};
    append_report(row, r.exciter);
    append_report(row, r.henon);
    t.add(std::move(row));
  }
  return t;
}

Table probability_table(std::span<const ProbabilityRow> rows) {
  Table t;
  t.header = {"a_min", "a_max", "crosses", "extrapolated", "delta_hat_cross"};
  for (RegionLabel l : kAllRegions) t.header.push_back("P_" + std::string(to_string(l)));
  for (RegionLabel l : kAllRegions)
    if (l != RegionLabel::External) t.header.push_back("dA_" + std::string(to_string(l)));
  for (const auto& r : rows) {
    const double dh = r.epsilon > 0 ? r.prediction.delta / std::pow(r.epsilon, 2.0 / 3.0) : std::nan("");
    std::vector<Cell> row{r.a_min, r.a_max, static_cast<std::int64_t>(r.prediction.crosses),
                     static_cast<std::int64_t>(r.prediction.extrapolated), dh};
    for (RegionLabel l : kAllRegions) row.emplace_back(r.prediction.probability[idx(l)]);
    for (RegionLabel l : kAllRegions)
      if (l != RegionLabel::External) row.emplace_back(r.prediction.d_area[idx(l)]);
    t.add(std::move(row));
  }
  return t;
}

}  // namespace dres
