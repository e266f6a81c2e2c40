#include "dres/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace dres {

std::string_view to_string(StudyKind k) {
  switch (k) {
    case StudyKind::Portrait: return "portrait";
    case StudyKind::FixedPoints: return "fixed-points";
    case StudyKind::Areas: return "areas";
    case StudyKind::Probability: return "probability";
    case StudyKind::Trap: return "trap";
    case StudyKind::Histogram: return "histogram";
    case StudyKind::Scan: return "scan";
    case StudyKind::Compare: return "compare";
  }
  return "?";
}

StudyKind study_from_string(std::string_view name) {
  for (StudyKind k : {StudyKind::Portrait, StudyKind::FixedPoints, StudyKind::Areas, StudyKind::Probability,
                      StudyKind::Trap, StudyKind::Histogram, StudyKind::Scan, StudyKind::Compare})
    if (to_string(k) == name) return k;
  throw DomainError("unknown study '" + std::string(name) + "'");
}

namespace {

std::string describe(const std::vector<ConfigIssue>& issues) {
  std::ostringstream out;
  out << issues.size() << " configuration error" << (issues.size() == 1 ? "" : "s");
  for (const auto& i : issues) {
    out << "\n  ";
    if (i.line > 0) out << "line " << i.line << ": ";
    if (!i.key.empty()) out << i.key << ": ";
    out << i.message;
  }
  return out.str();
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::optional<double> to_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
  return v;
}

template <typename Int>
std::optional<Int> to_int(const std::string& s) {
  Int v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && p == s.data() + s.size()) return v;
  // Accept integral floating forms such as 1e4.
  if (auto d = to_double(s); d && std::floor(*d) == *d && std::abs(*d) < 9e18) {
    if (*d < 0 && std::is_unsigned_v<Int>) return std::nullopt;
    return static_cast<Int>(*d);
  }
  return std::nullopt;
}

std::optional<bool> to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  return std::nullopt;
}

std::optional<std::vector<double>> to_list(const std::string& s) {
  std::vector<double> v;
  if (trim(s).empty()) return v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto d = to_double(trim(item));
    if (!d) return std::nullopt;
    v.push_back(*d);
  }
  return v;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_double(v[i]);
  return s;
}

// Parser returns an error message or nothing.
struct Key {
  std::string section, name;
  std::function<std::optional<std::string>(const std::string&, RunConfig&)> parse;
  std::function<std::string(const RunConfig&)> emit;
};

template <typename T>
Key number(std::string section, std::string name, T RunConfig::*m) {
  Key k{std::move(section), std::move(name), {}, {}};
  k.parse = [m](const std::string& s, RunConfig& c) -> std::optional<std::string> {
    if constexpr (std::is_floating_point_v<T>) {
      auto v = to_double(s);
      if (!v) return "expected a number, got '" + s + "'";
      c.*m = *v;
    } else {
      auto v = to_int<T>(s);
      if (!v) return "expected an integer, got '" + s + "'";
      c.*m = *v;
    }
    return std::nullopt;
  };
  k.emit = [m](const RunConfig& c) {
    if constexpr (std::is_floating_point_v<T>) return fmt_double(c.*m);
    else return std::to_string(c.*m);
  };
  return k;
}

Key boolean(std::string section, std::string name, bool RunConfig::*m) {
  return {std::move(section), std::move(name),
          [m](const std::string& s, RunConfig& c) -> std::optional<std::string> {
            auto v = to_bool(s);
            if (!v) return "expected true or false, got '" + s + "'";
            c.*m = *v;
            return std::nullopt;
          },
          [m](const RunConfig& c) { return std::string(c.*m ? "true" : "false"); }};
}

Key list(std::string section, std::string name, std::vector<double> RunConfig::*m) {
  return {std::move(section), std::move(name),
          [m](const std::string& s, RunConfig& c) -> std::optional<std::string> {
            auto v = to_list(s);
            if (!v) return "expected a comma-separated list of numbers, got '" + s + "'";
            c.*m = *v;
            return std::nullopt;
          },
          [m](const RunConfig& c) { return fmt_list(c.*m); }};
}

Key text(std::string section, std::string name, std::string RunConfig::*m) {
  return {std::move(section), std::move(name),
          [m](const std::string& s, RunConfig& c) -> std::optional<std::string> {
            c.*m = s;
            return std::nullopt;
          },
          [m](const RunConfig& c) { return c.*m; }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back({"run", "study",
                 [](const std::string& s, RunConfig& c) -> std::optional<std::string> {
                   try {
                     c.study = study_from_string(s);
                   } catch (const DomainError& e) {
                     return std::string(e.what());
                   }
                   return std::nullopt;
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.study)); }});
    k.push_back(text("run", "out", &RunConfig::out));
    k.push_back(number("run", "seed", &RunConfig::seed));
    k.push_back(boolean("run", "desk_scale", &RunConfig::desk_scale));
    k.push_back(number("run", "threads", &RunConfig::threads));

    k.push_back(number("map", "epsilon", &RunConfig::epsilon));
    k.push_back(number("map", "kappa", &RunConfig::kappa));
    k.push_back(number("map", "psi0", &RunConfig::psi0));
    k.push_back(number("map", "Delta", &RunConfig::Delta));
    k.push_back(number("map", "escape_radius", &RunConfig::escape_radius));
    k.push_back({"map", "resonance",
                 [](const std::string& s, RunConfig& c) -> std::optional<std::string> {
                   const auto slash = s.find('/');
                   if (slash == std::string::npos) return "expected p/q, got '" + s + "'";
                   auto p = to_int<int>(trim(s.substr(0, slash)));
                   auto q = to_int<int>(trim(s.substr(slash + 1)));
                   if (!p || !q) return "expected p/q, got '" + s + "'";
                   c.resonance_num = *p;
                   c.resonance_den = *q;
                   return std::nullopt;
                 },
                 [](const RunConfig& c) {
                   return std::to_string(c.resonance_num) + "/" + std::to_string(c.resonance_den);
                 }});

    k.push_back(number("protocol", "N", &RunConfig::N));
    k.push_back(number("protocol", "delta", &RunConfig::delta));
    k.push_back(number("protocol", "classify_turns", &RunConfig::classify_turns));

    k.push_back({"distribution", "kind",
                 [](const std::string& s, RunConfig& c) -> std::optional<std::string> {
                   if (s == "normal") c.distribution = DistributionKind::BivariateNormal;
                   else if (s == "annular") c.distribution = DistributionKind::AnnularUniform;
                   else return "expected normal or annular, got '" + s + "'";
                   return std::nullopt;
                 },
                 [](const RunConfig& c) {
                   return std::string(c.distribution == DistributionKind::BivariateNormal ? "normal" : "annular");
                 }});
    k.push_back(number("distribution", "J_avg", &RunConfig::J_avg));
    k.push_back(number("distribution", "j_min", &RunConfig::j_min));
    k.push_back(number("distribution", "j_max", &RunConfig::j_max));
    k.push_back(number("distribution", "particles", &RunConfig::particles));

    k.push_back(number("grid", "resolution", &RunConfig::resolution));
    k.push_back(number("grid", "half_width", &RunConfig::half_width));
    k.push_back(number("grid", "window_factor", &RunConfig::window_factor));
    k.push_back(number("grid", "n_turns", &RunConfig::grid_turns));
    k.push_back(boolean("grid", "check_resolution", &RunConfig::check_resolution));
    k.push_back(number("grid", "max_relative_error", &RunConfig::max_relative_error));
    k.push_back(number("grid", "min_island_cells", &RunConfig::min_island_cells));

    k.push_back(list("study", "delta_hat", &RunConfig::delta_hat));
    k.push_back(text("study", "scan_axis", &RunConfig::scan_axis));
    k.push_back(list("study", "scan_values", &RunConfig::scan_values));
    k.push_back(list("study", "J_values", &RunConfig::J_values));
    k.push_back(number("study", "amp_min", &RunConfig::amp_min));
    k.push_back(number("study", "amp_max", &RunConfig::amp_max));
    k.push_back(number("study", "bin_width", &RunConfig::bin_width));
    k.push_back(number("study", "per_bin", &RunConfig::per_bin));
    k.push_back(list("study", "table_delta_hat", &RunConfig::table_delta_hat));
    k.push_back(boolean("study", "measure", &RunConfig::measure));
    return k;
  }();
  return table;
}

void range_checks(const RunConfig& c, std::vector<ConfigIssue>& errors, std::vector<ConfigIssue>* warnings,
                  const std::map<std::string, int>& lines) {
  auto line_of = [&](const std::string& key) {
    auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  };
  auto err = [&](const std::string& key, const std::string& msg) { errors.push_back({line_of(key), key, msg}); };
  auto finite = [&](const std::string& key, double v) {
    if (!std::isfinite(v)) err(key, "must be finite");
  };
  finite("map.epsilon", c.epsilon);
  finite("map.kappa", c.kappa);
  finite("map.psi0", c.psi0);
  finite("map.Delta", c.Delta);
  finite("protocol.delta", c.delta);
  if (c.epsilon < 0) err("map.epsilon", "must be >= 0, got " + fmt_double(c.epsilon));
  if (!(c.kappa > -1 && c.kappa < 1) && warnings)
    warnings->push_back({line_of("map.kappa"), "map.kappa",
                         "outside (-1, 1); the normal-form analysis does not apply, got " + fmt_double(c.kappa)});
  if (!(c.escape_radius > 0)) err("map.escape_radius", "must be > 0");
  if (c.resonance_den == 0 || c.resonance_num * 4 != c.resonance_den)
    err("map.resonance", "only the 1/4 resonance is supported");
  if (c.N < 0) err("protocol.N", "must be >= 0 (0 selects the scale default)");
  if (c.classify_turns < 4) err("protocol.classify_turns", "must be >= 4");
  if (c.particles < 0) err("distribution.particles", "must be >= 0 (0 selects the scale default)");
  if (c.distribution == DistributionKind::BivariateNormal && !(c.J_avg > 0))
    err("distribution.J_avg", "must be > 0");
  if (c.distribution == DistributionKind::AnnularUniform && !(c.j_min >= 0 && c.j_max > c.j_min))
    err("distribution.j_max", "annular range needs 0 <= j_min < j_max");
  if (c.resolution < 2) err("grid.resolution", "must be >= 2");
  if (c.half_width < 0) err("grid.half_width", "must be >= 0 (0 selects the automatic window)");
  if (!(c.window_factor > 0)) err("grid.window_factor", "must be > 0");
  if (c.grid_turns < 4) err("grid.n_turns", "must be >= 4");
  if (!(c.max_relative_error > 0)) err("grid.max_relative_error", "must be > 0");
  if (c.min_island_cells < 0) err("grid.min_island_cells", "must be >= 0");
  if (c.scan_axis != "all") {
    try {
      scan_axis_from_string(c.scan_axis);
    } catch (const DomainError& e) {
      err("study.scan_axis", std::string(e.what()) + " (or 'all')");
    }
  }
  for (double j : c.J_values)
    if (!(j > 0)) err("study.J_values", "entries must be > 0");
  if (!(c.amp_min >= 0 && c.amp_max > c.amp_min)) err("study.amp_max", "needs 0 <= amp_min < amp_max");
  if (!(c.bin_width > 0)) err("study.bin_width", "must be > 0");
  if (c.per_bin < 1) err("study.per_bin", "must be >= 1");
  if (c.study == StudyKind::Probability && c.table_delta_hat.size() < 2)
    err("study.table_delta_hat", "needs at least two entries");
  if (!std::is_sorted(c.table_delta_hat.begin(), c.table_delta_hat.end()))
    err("study.table_delta_hat", "must be increasing");
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues) : std::runtime_error(describe(issues)), issues_(std::move(issues)) {}

MapParams<double> RunConfig::map_params(double d) const {
  MapParams<double> p;
  p.resonance = {resonance_num, resonance_den};
  p.delta = d;
  p.Delta = Delta;
  p.epsilon = epsilon;
  p.kappa = kappa;
  p.psi0 = psi0;
  p.escape_radius = escape_radius;
  p.validate();
  return p;
}

MapParams<double> RunConfig::map_params_scaled(double dh) const {
  return map_params(dh * std::pow(epsilon, 2.0 / 3.0));
}

GridSpec RunConfig::grid() const {
  GridSpec g;
  g.resolution = resolution;
  g.half_width = half_width;
  g.window_factor = window_factor;
  g.classifier.n_turns = grid_turns;
  g.check_resolution = check_resolution;
  g.max_relative_error = max_relative_error;
  g.min_island_cells = min_island_cells;
  g.threads = threads;
  return g;
}

ProtocolSpec RunConfig::protocol() const {
  ProtocolSpec p;
  p.N = effective_N();
  p.epsilon = epsilon;
  p.delta = delta;
  p.base = map_params(0.0);
  p.base.epsilon = 0;
  p.classifier.n_turns = classify_turns;
  p.threads = threads;
  return p;
}

DistributionSpec RunConfig::distribution_spec() const {
  DistributionSpec d = DistributionSpec::normal(J_avg, effective_particles(), seed);
  if (distribution == DistributionKind::AnnularUniform) {
    d.kind = DistributionKind::AnnularUniform;
    d.j_min = j_min;
    d.j_max = j_max;
  }
  return d;
}

StudyDefaults RunConfig::study_defaults() const {
  StudyDefaults d;
  d.protocol = protocol();
  d.J_avg = J_avg;
  d.particles = effective_particles();
  d.seed = seed;
  return d;
}

void RunConfig::validate() const {
  std::vector<ConfigIssue> errors;
  range_checks(*this, errors, nullptr, {});
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

RunConfig parse_config(std::string_view text, std::vector<ConfigIssue>* warnings) {
  RunConfig c;
  std::vector<ConfigIssue> errors;
  std::map<std::string, int> seen;
  std::string section = "run";
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back({line_no, "", "malformed section header '" + line + "'"});
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      const bool known = std::any_of(keys().begin(), keys().end(), [&](const Key& k) { return k.section == section; });
      if (!known) errors.push_back({line_no, "", "unknown section [" + section + "]"});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back({line_no, "", "expected 'key = value', got '" + line + "'"});
      continue;
    }
    const std::string name = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section + "." + name;
    auto it = std::find_if(keys().begin(), keys().end(),
                           [&](const Key& k) { return k.section == section && k.name == name; });
    if (it == keys().end()) {
      errors.push_back({line_no, full, "unknown key"});
      continue;
    }
    if (auto prev = seen.find(full); prev != seen.end()) {
      errors.push_back({line_no, full, "duplicate key (first set on line " + std::to_string(prev->second) + ")"});
      continue;
    }
    seen[full] = line_no;
    if (auto msg = it->parse(value, c)) errors.push_back({line_no, full, *msg});
  }
  range_checks(c, errors, warnings, seen);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

RunConfig load_config(const std::string& path, std::vector<ConfigIssue>* warnings) {
  std::ifstream f(path);
  if (!f) throw ConfigError({{0, "", "cannot read config file '" + path + "'"}});
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), warnings);
}

std::string emit_config(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& k : keys()) {
    if (k.section != section) {
      if (!section.empty()) out << '\n';
      section = k.section;
      out << '[' << section << "]\n";
    }
    out << k.name << " = " << k.emit(config) << '\n';
  }
  return out.str();
}

}  // namespace dres
