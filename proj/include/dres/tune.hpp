#pragma once

// Average phase advance tunes and tune-based region classification.

#include "dres/common.hpp"
#include "dres/map_core.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace dres {

enum class RegionLabel : int { East = 0, North = 1, West = 2, South = 3, Core = 4, External = 5 };

inline constexpr int kRegionCount = 6;
inline constexpr RegionLabel kIslands[] = {RegionLabel::East, RegionLabel::North, RegionLabel::West,
                                           RegionLabel::South};
inline constexpr RegionLabel kAllRegions[] = {RegionLabel::East, RegionLabel::North,
                                              RegionLabel::West, RegionLabel::South,
                                              RegionLabel::Core, RegionLabel::External};

std::string_view to_string(RegionLabel label);
RegionLabel region_from_string(std::string_view name);
inline bool is_island(RegionLabel l) { return static_cast<int>(l) < 4; }

/// Island named after the quadrant of an angle, boundaries at +-pi/4 and +-3pi/4.
RegionLabel island_from_angle(double angle);

struct TunePair {
  double nu0 = 0;  ///< cycles per turn
  double nu1 = 0;  ///< cycles per stroboscopic step
};

/// Phase advance from a to b in (-pi, pi], clockwise positive.
template <typename Scalar>
Scalar phase_advance(const Vector2<Scalar>& a, const Vector2<Scalar>& b) {
  using std::atan2;
  return atan2(b.x() * a.y() - a.x() * b.y(), b.x() * a.x() + b.y() * a.y());
}

/// nu0 = (1 / 2 pi N) sum_{n=1..N} atan2(x_n p_{n-1} - x_{n-1} p_n, x_n x_{n-1} + p_n p_{n-1}),
/// using samples[0..n_turns]. Throws UndefinedAngle on a sample at the origin.
double main_tune(std::span<const Vector2d> samples, std::size_t n_turns);
inline double main_tune(std::span<const Vector2d> samples) {
  return main_tune(samples, samples.empty() ? 0 : samples.size() - 1);
}

/// Average phase advance of consecutive stroboscopic samples about centre, in cycles per
/// stroboscopic step. With centre = 0 this is the textbook stride-4 formula.
double secondary_tune(std::span<const Vector2d> strobe, const Vector2d& centre = Vector2d::Zero());

/// Secondary tune from a turn-by-turn orbit: every stride-th sample starting at offset.
double secondary_tune(std::span<const Vector2d> samples, int stride, int offset,
                      const Vector2d& centre = Vector2d::Zero());

struct ClassifierConfig {
  std::int64_t n_turns = 4096;  ///< N_t
  /// |nu0 - 1/4| below which an orbit counts as resonant with nu1 > 0 (Core); 0 means 10 / N_t.
  double core_tol = 0;
  /// |nu0 - 1/4| below which an orbit counts as locked inside an island; 0 means 0.5 / N_t.
  double island_tol = 0;
  /// |nu1| below which a resonant orbit is boundary-indeterminate; 0 means 1 / N_t.
  double nu1_tol = 0;
  /// Turn phase (mod 4) of the stroboscopic section.
  int section_phase = kSectionPhase;

  double core_tolerance() const { return core_tol > 0 ? core_tol : 10.0 / n_turns; }
  double island_tolerance() const { return island_tol > 0 ? island_tol : 0.5 / n_turns; }
  double nu1_tolerance() const { return nu1_tol > 0 ? nu1_tol : 1.0 / n_turns; }
};

struct Classification {
  RegionLabel label = RegionLabel::External;
  TunePair tunes;
  Vector2d centroid = Vector2d::Zero();  ///< stroboscopic centroid
  bool escaped = false;
  bool indeterminate = false;  ///< resonant with |nu1| below its tolerance
};

/// Region of the orbit started from `initial` at turn start_turn under the frozen map.
///
/// nu0 is the average phase advance over N_t turns. nu1 is measured on the stroboscopic
/// samples (turns with n = section_phase mod 4) about their centroid. Then
///   nu1 > 0 and |nu0 - 1/4| < core_tol    -> Core
///   nu1 <= 0 and |nu0 - 1/4| < island_tol -> island picked by the centroid's quadrant
///   otherwise                             -> External (also for escaped orbits).
Classification classify(const ParticleState<double>& initial, const MapParams<double>& params,
                        const ClassifierConfig& config = {}, std::int64_t start_turn = kSectionPhase);

Classification classify(const ParticleState<double>& initial, const FrozenMap<double>& map,
                        const ClassifierConfig& config = {}, std::int64_t start_turn = kSectionPhase);

/// classify() for many initial conditions at once; results are identical to calling
/// classify() on each element.
std::vector<Classification> classify_batch(std::span<const ParticleState<double>> initial,
                                           const FrozenMap<double>& map, const ClassifierConfig& config = {},
                                           std::int64_t start_turn = kSectionPhase);

}  // namespace dres
