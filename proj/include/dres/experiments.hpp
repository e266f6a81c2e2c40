#pragma once

// Trapping experiments: particle distributions swept through the two-phase modulation
// protocol and classified at the end with the frozen final map.

#include "dres/map_core.hpp"
#include "dres/phase_space.hpp"
#include "dres/tune.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dres {

enum class DistributionKind { AnnularUniform, BivariateNormal };

struct DistributionSpec {
  DistributionKind kind = DistributionKind::BivariateNormal;
  double sigma_x = 0.1;  ///< normal kind
  double sigma_p = 0.1;
  double j_min = 0;  ///< annular kind, action range
  double j_max = 0;
  std::size_t count = 500;
  std::uint64_t seed = 1;

  /// Normal distribution with <J> = (sigma_x^2 + sigma_p^2) / 2 = J_avg.
  static DistributionSpec normal(double J_avg, std::size_t count, std::uint64_t seed);
  /// Annulus sqrt(2J) in [a_min, a_max], uniform in action and angle.
  static DistributionSpec amplitude_bin(double a_min, double a_max, std::size_t count, std::uint64_t seed);

  void validate() const;
  double mean_action() const;
};

/// Particle i draws from stream i of the counter-based generator.
std::vector<ParticleState<double>> generate_distribution(const DistributionSpec& spec);

struct ProtocolSpec {
  std::int64_t N = 10000;       ///< half-length in turns
  double epsilon = 1e-4;        ///< exciter strength reached after N turns
  double delta = kTwoPi<double> * 5e-4;  ///< detuning span: -delta -> +delta in phase 2
  MapParams<double> base{};     ///< kappa, psi0, escape radius
  ClassifierConfig classifier{};
  unsigned threads = 0;

  void validate() const;
  /// [0, N): epsilon 0 -> epsilon at -delta; [N, 2N): epsilon held, delta -delta -> +delta.
  ModulationSchedule<double> schedule() const;
  /// Frozen end-of-protocol parameters (epsilon, +delta) used for classification.
  MapParams<double> final_params() const;
};

/// Desk-scale (N = 1e4, N_p = 500) or full-scale (N = 1e5, N_p = 3000) defaults:
/// epsilon = 1e-4, delta / 2pi = 5e-4, kappa = 0.1, psi0 = 0, <J> = 0.01.
struct StudyDefaults {
  ProtocolSpec protocol;
  double J_avg = 0.01;
  std::size_t particles = 500;
  std::uint64_t seed = 1;

  static StudyDefaults desk();
  static StudyDefaults full();
};

struct TrapReport {
  RegionArray<double> fraction{};  ///< escaped particles are counted as External
  RegionArray<std::int64_t> count{};
  double escaped_fraction = 0;
  std::int64_t escaped = 0;
  std::int64_t indeterminate = 0;
  std::int64_t particles = 0;
  double east_share = 0;       ///< East / sum of islands
  RegionLabel dominant = RegionLabel::East;
  double dominant_share = 0;   ///< largest island / sum of islands
  // provenance
  std::uint64_t seed = 0;
  DistributionSpec distribution;
  ProtocolSpec protocol;
  double wall_seconds = 0;

  double island_fraction() const;
  double operator[](RegionLabel l) const { return fraction[idx(l)]; }
};

/// Final region of each particle.
std::vector<RegionLabel> trap_labels(std::span<const ParticleState<double>> particles, const ProtocolSpec& protocol,
                                     std::int64_t* escaped = nullptr, std::int64_t* indeterminate = nullptr);

TrapReport run_trapping(const DistributionSpec& dist, const ProtocolSpec& protocol);

struct HistogramRow {
  double a_min = 0, a_max = 0;  ///< initial amplitude sqrt(2 J0) range
  TrapReport report;
};

/// One annular run per amplitude bin in [a_min, a_max).
std::vector<HistogramRow> amplitude_histogram(const ProtocolSpec& protocol, double a_min, double a_max,
                                              double bin_width, std::size_t per_bin, std::uint64_t seed);

enum class ScanAxis { Epsilon, Delta, N, Kappa, Psi0, JAvg };
std::string_view to_string(ScanAxis a);
ScanAxis scan_axis_from_string(std::string_view s);

struct ScanRow {
  double value = 0;
  TrapReport report;
};

/// One normal-distribution run per grid value, all other parameters from defaults. Every
/// grid point uses the same seed.
std::vector<ScanRow> parameter_scan(ScanAxis axis, std::span<const double> grid, const StudyDefaults& defaults);

struct CompareRow {
  double J_avg = 0;
  TrapReport exciter;  ///< epsilon from defaults
  TrapReport henon;    ///< epsilon = 0
};

std::vector<CompareRow> compare_henon(std::span<const double> J_grid, const StudyDefaults& defaults);

}  // namespace dres
