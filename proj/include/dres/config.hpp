#pragma once

// Run configuration: flat "key = value" text with [section] headers and '#' comments.
// Keys before the first header belong to [run].

#include "dres/experiments.hpp"
#include "dres/phase_space.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dres {

enum class StudyKind { Portrait, FixedPoints, Areas, Probability, Trap, Histogram, Scan, Compare };
std::string_view to_string(StudyKind k);
/// Throws DomainError on an unknown name.
StudyKind study_from_string(std::string_view name);

struct ConfigIssue {
  int line = 0;  ///< 0 when not tied to a line
  std::string key;
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

struct RunConfig {
  // [run]
  StudyKind study = StudyKind::Portrait;
  std::string out = "out";
  std::uint64_t seed = 1;
  bool desk_scale = true;
  unsigned threads = 0;
  // [map]
  double epsilon = 1e-4;
  double kappa = 0.1;
  double psi0 = 0;
  double Delta = 0;
  double escape_radius = 10;
  int resonance_num = 1;
  int resonance_den = 4;
  // [protocol]
  std::int64_t N = 0;  ///< 0: 1e4 at desk scale, 1e5 otherwise
  double delta = kTwoPi<double> * 5e-4;
  std::int64_t classify_turns = 4096;
  // [distribution]
  DistributionKind distribution = DistributionKind::BivariateNormal;
  double J_avg = 0.01;
  double j_min = 0;
  double j_max = 0.02;
  std::int64_t particles = 0;  ///< 0: 500 at desk scale, 3000 otherwise
  // [grid]
  int resolution = 300;
  double half_width = 0;
  double window_factor = 1.5;
  std::int64_t grid_turns = 16384;
  bool check_resolution = true;
  double max_relative_error = 0.2;
  int min_island_cells = 25;
  // [study]
  std::vector<double> delta_hat{0.1, 0.25, 1.0};
  std::string scan_axis = "all";
  std::vector<double> scan_values;  ///< empty: a default grid per axis
  std::vector<double> J_values{0.001, 0.002, 0.005, 0.01, 0.02, 0.05};
  double amp_min = 0;
  double amp_max = 0.25;
  double bin_width = 0.01;
  std::int64_t per_bin = 500;
  std::vector<double> table_delta_hat{0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
  bool measure = true;  ///< probability study: also run the trapping histogram

  bool operator==(const RunConfig&) const = default;

  std::int64_t effective_N() const { return N > 0 ? N : (desk_scale ? 10000 : 100000); }
  std::size_t effective_particles() const {
    return static_cast<std::size_t>(particles > 0 ? particles : (desk_scale ? 500 : 3000));
  }
  /// Frozen map at detuning delta with this config's epsilon, kappa, psi0.
  MapParams<double> map_params(double delta) const;
  /// Frozen map at scaled detuning delta_hat.
  MapParams<double> map_params_scaled(double delta_hat) const;
  GridSpec grid() const;
  ProtocolSpec protocol() const;
  DistributionSpec distribution_spec() const;
  StudyDefaults study_defaults() const;
  /// Throws ConfigError listing every violated range.
  void validate() const;
};

/// Parses and validates. Collects every error before throwing ConfigError; non-fatal range
/// notes (kappa outside (-1, 1)) go to warnings.
RunConfig parse_config(std::string_view text, std::vector<ConfigIssue>* warnings = nullptr);
RunConfig load_config(const std::string& path, std::vector<ConfigIssue>* warnings = nullptr);

/// Every key, at full precision, so parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

}  // namespace dres
