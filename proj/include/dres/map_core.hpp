#pragma once

// Exciter-driven Henon-like map with a cubic kick:
//
//   (x, p) -> R(w0) * (x, p + x^2 + kappa x^3 + eps cos(w n + psi0))
//
// with w0 = w_r + delta, w = w_r + Delta and the clockwise rotation
//
//   R(w) = [  cos w   sin w ]
//          [ -sin w   cos w ]
//
// chosen so that the average phase advance of the pure rotation is +w/(2 pi).
// Only the 1:4 resonance (w_r = pi/2) is supported.

#include "dres/common.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dres {

/// Point (x, p) of the two-dimensional phase space.
template <typename Scalar>
using ParticleState = Vector2<Scalar>;

/// Stroboscopic section used for portraits, areas and island naming: turns n = 2 (mod 4).
/// In this section the exciter-displaced centre sits on the positive x axis for psi0 = 0.
inline constexpr int kSectionPhase = 2;
inline constexpr int kResonanceOrder = 4;

/// Resonant frequency w_r / (2 pi) as a rational number.
struct Resonance {
  int numerator = 1;
  int denominator = 4;
  friend bool operator==(const Resonance&, const Resonance&) = default;
};

template <typename Scalar = double>
struct MapParams {
  Resonance resonance{};
  Scalar delta = 0;    ///< detuning of the main frequency, rad/turn
  Scalar Delta = 0;    ///< detuning of the exciter frequency, rad/turn
  Scalar epsilon = 0;  ///< exciter strength
  Scalar kappa = 0;    ///< cubic coefficient
  Scalar psi0 = 0;     ///< exciter initial phase
  Scalar escape_radius = 10;

  void validate() const {
    if (resonance.denominator == 0)
      throw UnsupportedResonance("resonance denominator must be non-zero");
    // 1:4 only, in any equivalent rational form (2/8, ...).
    if (resonance.numerator * 4 != resonance.denominator)
      throw UnsupportedResonance("only the 1:4 resonance (omega_r / 2pi = 1/4) is supported, got " +
                                 std::to_string(resonance.numerator) + "/" +
                                 std::to_string(resonance.denominator));
    if (!(epsilon >= 0)) throw DomainError("epsilon must be >= 0");
    if (!(escape_radius > 0)) throw DomainError("escape radius must be positive");
  }

  Scalar omega_r() const { return kPi<Scalar> / 2; }
  Scalar omega0() const { return omega_r() + delta; }
};

/// Checked constructor for the common case Delta = 0.
template <typename Scalar = double>
MapParams<Scalar> make_map_params(Scalar delta, Scalar epsilon, Scalar kappa, Scalar psi0 = 0) {
  MapParams<Scalar> p;
  p.delta = delta;
  p.epsilon = epsilon;
  p.kappa = kappa;
  p.psi0 = psi0;
  p.validate();
  return p;
}

namespace detail {

// psi0 = m * pi/2 + r with |r| <= pi/4; m folded into the quarter-turn index so that
// psi0 = m pi/2 reproduces psi0 = 0 shifted by m turns bit for bit.
template <typename Scalar>
struct PhaseSplit {
  int quarter;
  Scalar residual;
};

template <typename Scalar>
PhaseSplit<Scalar> split_phase(Scalar psi0) {
  using std::round;
  const Scalar half_pi = kPi<Scalar> / 2;
  const Scalar m = round(psi0 / half_pi);
  const Scalar r = psi0 - m * half_pi;
  long q = static_cast<long>(m) % 4;
  if (q < 0) q += 4;
  return {static_cast<int>(q), r};
}

// cos(k pi/2 + phi) without evaluating cos(pi/2) in floating point.
template <typename Scalar>
Scalar quarter_cos(int k, Scalar phi) {
  using std::cos;
  using std::sin;
  switch (k & 3) {
    case 0: return cos(phi);
    case 1: return -sin(phi);
    case 2: return -cos(phi);
    default: return sin(phi);
  }
}

}  // namespace detail

/// cos(w n + psi0) with w_r n reduced modulo 2 pi exactly.
template <typename Scalar>
Scalar exciter_phase_cos(std::int64_t n, Scalar Delta, Scalar psi0) {
  const auto split = detail::split_phase(psi0);
  const int k = static_cast<int>(((n % 4) + 4) % 4) + split.quarter;
  return detail::quarter_cos(k, Delta * static_cast<Scalar>(n) + split.residual);
}

/// Clockwise rotation by pi/2 + delta, built from sin/cos of delta only.
template <typename Scalar>
Matrix2<Scalar> rotation(Scalar delta) {
  using std::cos;
  using std::sin;
  const Scalar c = -sin(delta);  // cos(pi/2 + delta)
  const Scalar s = cos(delta);   // sin(pi/2 + delta)
  Matrix2<Scalar> r;
  r << c, s, -s, c;
  return r;
}

/// Kick term x^2 + kappa x^3 added to p before the rotation.
template <typename Scalar>
Scalar nonlinear_kick(Scalar x, Scalar kappa) {
  return x * x * (Scalar(1) + kappa * x);
}

/// One turn of the map at turn index n.
template <typename Scalar>
ParticleState<Scalar> step(const ParticleState<Scalar>& state, const MapParams<Scalar>& params,
                           std::int64_t n) {
  const Scalar x = state.x();
  const Scalar kicked =
      state.y() + nonlinear_kick(x, params.kappa) +
      params.epsilon * exciter_phase_cos(n, params.Delta, params.psi0);
  return rotation(params.delta) * ParticleState<Scalar>(x, kicked);
}

/// Jacobian of one step; the exciter kick does not depend on the state.
template <typename Scalar>
Matrix2<Scalar> step_jacobian(const ParticleState<Scalar>& state, const MapParams<Scalar>& params) {
  const Scalar x = state.x();
  Matrix2<Scalar> kick;
  kick << 1, 0, Scalar(2) * x + Scalar(3) * params.kappa * x * x, 1;
  return rotation(params.delta) * kick;
}

template <typename Scalar>
bool outside_radius(const ParticleState<Scalar>& s, Scalar radius) {
  using std::isfinite;
  const Scalar r2 = s.squaredNorm();
  return !isfinite(r2) || r2 > radius * radius;
}

/// Frozen map with the rotation and the four exciter kicks cached (Delta = 0 path) for
/// the tracking loops. Produces the same numbers as step().
template <typename Scalar = double>
class FrozenMap {
 public:
  explicit FrozenMap(const MapParams<Scalar>& params) : params_(params) {
    params_.validate();
    const Matrix2<Scalar> r = rotation(params.delta);
    c_ = r(0, 0);
    s_ = r(0, 1);
    for (int k = 0; k < 4; ++k)
      kick_[k] = params.epsilon * exciter_phase_cos<Scalar>(k, Scalar(0), params.psi0);
    constant_exciter_ = params.Delta == Scalar(0);
    radius2_ = params.escape_radius * params.escape_radius;
  }

  const MapParams<Scalar>& params() const { return params_; }

  void apply(Scalar& x, Scalar& p, std::int64_t n) const {
    const Scalar e = constant_exciter_
                         ? kick_[n & 3]
                         : params_.epsilon * exciter_phase_cos(n, params_.Delta, params_.psi0);
    const Scalar kicked = p + nonlinear_kick(x, params_.kappa) + e;
    const Scalar nx = c_ * x + s_ * kicked;
    p = -s_ * x + c_ * kicked;
    x = nx;
  }

  ParticleState<Scalar> operator()(const ParticleState<Scalar>& s, std::int64_t n) const {
    Scalar x = s.x(), p = s.y();
    apply(x, p, n);
    return {x, p};
  }

  /// Also true for non-finite states.
  bool escaped(Scalar x, Scalar p) const { return !(x * x + p * p <= radius2_); }

  Scalar cos_w0() const { return c_; }
  Scalar sin_w0() const { return s_; }
  /// Exciter kick at turns n = k (mod 4); meaningful when Delta = 0.
  Scalar exciter_kick(int k) const { return kick_[k & 3]; }
  bool constant_exciter() const { return constant_exciter_; }

 private:
  MapParams<Scalar> params_;
  Scalar c_{}, s_{};
  Scalar kick_[4]{};
  Scalar radius2_{};
  bool constant_exciter_ = true;
};

/// Affine ramp of the modulated parameters over the turn range [begin, end).
/// The value at n interpolates linearly from the *_begin value at n = begin towards
/// the *_end value reached at n = end.
template <typename Scalar = double>
struct Segment {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  Scalar epsilon_begin = 0, epsilon_end = 0;
  Scalar delta_begin = 0, delta_end = 0;
  Scalar Delta_begin = 0, Delta_end = 0;

  Scalar fraction(std::int64_t n) const {
    return static_cast<Scalar>(n - begin) / static_cast<Scalar>(end - begin);
  }
  Scalar epsilon_at(std::int64_t n) const {
    return epsilon_begin + (epsilon_end - epsilon_begin) * fraction(n);
  }
  Scalar delta_at(std::int64_t n) const { return delta_begin + (delta_end - delta_begin) * fraction(n); }
  Scalar Delta_at(std::int64_t n) const { return Delta_begin + (Delta_end - Delta_begin) * fraction(n); }
};

template <typename Scalar = double>
struct ModulationSchedule {
  std::int64_t n_total = 0;
  std::vector<Segment<Scalar>> segments;

  /// Segments must tile [0, n_total) in order, without gaps or overlaps.
  void validate() const {
    if (n_total < 0) throw DomainError("schedule length must be non-negative");
    std::int64_t cursor = 0;
    for (const auto& s : segments) {
      if (s.begin != cursor)
        throw DomainError("schedule segments must tile [0, n_total) without gaps or overlaps");
      if (s.end <= s.begin) throw DomainError("schedule segment must have end > begin");
      cursor = s.end;
    }
    if (cursor != n_total)
      throw DomainError("schedule segments must cover exactly [0, n_total)");
  }

  /// Frozen parameters at turn n (left endpoint of the turn), other fields taken from base.
  MapParams<Scalar> params_at(std::int64_t n, const MapParams<Scalar>& base) const {
    for (const auto& s : segments) {
      if (n >= s.begin && n < s.end) {
        MapParams<Scalar> p = base;
        p.epsilon = s.epsilon_at(n);
        p.delta = s.delta_at(n);
        p.Delta = s.Delta_at(n);
        return p;
      }
    }
    throw DomainError("turn index outside the schedule");
  }

  /// Parameters reached at the end of the schedule (n = n_total).
  MapParams<Scalar> final_params(const MapParams<Scalar>& base) const {
    MapParams<Scalar> p = base;
    if (!segments.empty()) {
      const auto& s = segments.back();
      p.epsilon = s.epsilon_end;
      p.delta = s.delta_end;
      p.Delta = s.Delta_end;
    }
    return p;
  }
};

/// Constant parameters for n_total turns.
template <typename Scalar = double>
ModulationSchedule<Scalar> constant_schedule(std::int64_t n_total, const MapParams<Scalar>& p) {
  ModulationSchedule<Scalar> s;
  s.n_total = n_total;
  if (n_total > 0)
    s.segments.push_back({0, n_total, p.epsilon, p.epsilon, p.delta, p.delta, p.Delta, p.Delta});
  return s;
}

template <typename Scalar = double>
struct IterateResult {
  ParticleState<Scalar> state;
  std::optional<std::int64_t> escape_turn;  ///< turn whose step left the escape radius
  bool escaped() const { return escape_turn.has_value(); }
};

/// Tracks one particle through the whole schedule. Escape stops the iteration.
template <typename Scalar>
IterateResult<Scalar> iterate(const ParticleState<Scalar>& start,
                              const ModulationSchedule<Scalar>& schedule,
                              const MapParams<Scalar>& base) {
  using std::cos;
  using std::sin;
  base.validate();
  schedule.validate();
  Scalar x = start.x(), p = start.y();
  const auto split = detail::split_phase(base.psi0);
  for (const auto& seg : schedule.segments) {
    for (std::int64_t n = seg.begin; n < seg.end; ++n) {
      const Scalar delta = seg.delta_at(n);
      const Scalar eps = seg.epsilon_at(n);
      const Scalar Delta = seg.Delta_at(n);
      const int k = static_cast<int>(n % 4) + split.quarter;
      const Scalar e = eps * detail::quarter_cos(k, Delta * static_cast<Scalar>(n) + split.residual);
      const Scalar c = -sin(delta), s = cos(delta);
      const Scalar kicked = p + nonlinear_kick(x, base.kappa) + e;
      const Scalar nx = c * x + s * kicked;
      p = -s * x + c * kicked;
      x = nx;
      const Scalar r2 = x * x + p * p;
      if (!std::isfinite(r2) || r2 > base.escape_radius * base.escape_radius)
        return {{x, p}, n};
    }
  }
  return {{x, p}, std::nullopt};
}

/// Per-turn rotation and exciter kick of a schedule, evaluated once and shared by every
/// particle. Tracking with the table reproduces iterate() bit for bit.
template <typename Scalar = double>
struct ScheduleTable {
  std::vector<Scalar> cos_w0, sin_w0, kick;
  Scalar kappa = 0;
  Scalar escape_radius = 10;

  ScheduleTable(const ModulationSchedule<Scalar>& schedule, const MapParams<Scalar>& base) {
    using std::cos;
    using std::sin;
    base.validate();
    schedule.validate();
    kappa = base.kappa;
    escape_radius = base.escape_radius;
    const auto n = static_cast<std::size_t>(schedule.n_total);
    cos_w0.resize(n);
    sin_w0.resize(n);
    kick.resize(n);
    const auto split = detail::split_phase(base.psi0);
    for (const auto& seg : schedule.segments) {
      for (std::int64_t t = seg.begin; t < seg.end; ++t) {
        const Scalar delta = seg.delta_at(t);
        const Scalar eps = seg.epsilon_at(t);
        const Scalar Delta = seg.Delta_at(t);
        const int k = static_cast<int>(t % 4) + split.quarter;
        const auto i = static_cast<std::size_t>(t);
        kick[i] = eps * detail::quarter_cos(k, Delta * static_cast<Scalar>(t) + split.residual);
        cos_w0[i] = -sin(delta);
        sin_w0[i] = cos(delta);
      }
    }
  }

  std::int64_t size() const { return static_cast<std::int64_t>(kick.size()); }
};

/// iterate() for a set of particles, several particles interleaved per turn.
template <typename Scalar>
std::vector<IterateResult<Scalar>> iterate_batch(std::span<const ParticleState<Scalar>> starts,
                                                 const ScheduleTable<Scalar>& table) {
  constexpr int lanes = 8;
  std::vector<IterateResult<Scalar>> out(starts.size());
  const std::int64_t n_total = table.size();
  const Scalar r2 = table.escape_radius * table.escape_radius;
  const Scalar kappa = table.kappa;
  for (std::size_t first = 0; first < starts.size(); first += lanes) {
    Scalar x[lanes], p[lanes];
    bool alive[lanes];
    int n_alive = 0;
    for (int l = 0; l < lanes; ++l) {
      alive[l] = first + l < starts.size();
      const auto& q = starts[alive[l] ? first + l : first];
      x[l] = q.x();
      p[l] = q.y();
      n_alive += alive[l];
    }
    for (std::int64_t t = 0; t < n_total && n_alive > 0; ++t) {
      const auto i = static_cast<std::size_t>(t);
      const Scalar c = table.cos_w0[i], s = table.sin_w0[i], e = table.kick[i];
      bool any = false;
      for (int l = 0; l < lanes; ++l) {
        const Scalar x0 = x[l];
        const Scalar kicked = p[l] + nonlinear_kick(x0, kappa) + e;
        x[l] = c * x0 + s * kicked;
        p[l] = -s * x0 + c * kicked;
        any |= !(x[l] * x[l] + p[l] * p[l] <= r2);
      }
      if (any) {
        for (int l = 0; l < lanes; ++l) {
          if (alive[l] && !(x[l] * x[l] + p[l] * p[l] <= r2)) {
            out[first + l] = {{x[l], p[l]}, t};
            alive[l] = false;
            --n_alive;
          }
          if (!alive[l]) x[l] = p[l] = 0;
        }
      }
    }
    for (int l = 0; l < lanes; ++l)
      if (alive[l]) out[first + l] = {{x[l], p[l]}, std::nullopt};
  }
  return out;
}

/// Turn-by-turn orbit of the frozen map: samples[0] = start at turn start_turn, then one
/// sample per turn. On escape the orbit is truncated after the escaping sample.
template <typename Scalar = double>
struct Orbit {
  std::vector<ParticleState<Scalar>> samples;
  std::int64_t start_turn = 0;
  std::optional<std::int64_t> escape_turn;
};

template <typename Scalar>
Orbit<Scalar> track(const ParticleState<Scalar>& start, const MapParams<Scalar>& params,
                    std::int64_t n_turns, std::int64_t start_turn = 0) {
  const FrozenMap<Scalar> map(params);
  Orbit<Scalar> orbit;
  orbit.start_turn = start_turn;
  orbit.samples.reserve(static_cast<std::size_t>(n_turns) + 1);
  orbit.samples.push_back(start);
  Scalar x = start.x(), p = start.y();
  for (std::int64_t i = 0; i < n_turns; ++i) {
    map.apply(x, p, start_turn + i);
    orbit.samples.emplace_back(x, p);
    if (map.escaped(x, p)) {
      orbit.escape_turn = start_turn + i;
      break;
    }
  }
  return orbit;
}

/// Every stride-th iterate of the frozen map, starting with the initial state.
template <typename Scalar>
Orbit<Scalar> stroboscopic_orbit(const ParticleState<Scalar>& start, const MapParams<Scalar>& params,
                                 int stride, std::int64_t count, std::int64_t start_turn = 0) {
  if (stride <= 0) throw DomainError("stride must be positive");
  const FrozenMap<Scalar> map(params);
  Orbit<Scalar> orbit;
  orbit.start_turn = start_turn;
  if (count <= 0) return orbit;
  orbit.samples.reserve(static_cast<std::size_t>(count));
  orbit.samples.push_back(start);
  Scalar x = start.x(), p = start.y();
  std::int64_t n = start_turn;
  while (static_cast<std::int64_t>(orbit.samples.size()) < count) {
    for (int k = 0; k < stride; ++k, ++n) {
      map.apply(x, p, n);
      if (map.escaped(x, p)) {
        orbit.escape_turn = n;
        return orbit;
      }
    }
    orbit.samples.emplace_back(x, p);
  }
  return orbit;
}

}  // namespace dres
