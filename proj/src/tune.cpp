#include "dres/tune.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace dres {

std::string_view to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::East: return "East";
    case RegionLabel::North: return "North";
    case RegionLabel::West: return "West";
    case RegionLabel::South: return "South";
    case RegionLabel::Core: return "Core";
    case RegionLabel::External: return "External";
  }
  return "?";
}

RegionLabel region_from_string(std::string_view name) {
  for (RegionLabel l : kAllRegions)
    if (to_string(l) == name) return l;
  throw DomainError("unknown region '" + std::string(name) + "'");
}

RegionLabel island_from_angle(double a) {
  const double q = kPi<double> / 4;
  if (std::abs(a) < q) return RegionLabel::East;
  if (a >= q && a < 3 * q) return RegionLabel::North;
  if (a <= -q && a > -3 * q) return RegionLabel::South;
  return RegionLabel::West;
}

double main_tune(std::span<const Vector2d> samples, std::size_t n_turns) {
  if (n_turns == 0 || samples.size() < n_turns + 1)
    throw DomainError("main tune needs at least N_t + 1 samples");
  double sum = 0;
  for (std::size_t n = 1; n <= n_turns; ++n) {
    if (samples[n].isZero() || samples[n - 1].isZero())
      throw UndefinedAngle("orbit sample at the origin, phase advance undefined");
    sum += phase_advance(samples[n - 1], samples[n]);
  }
  return sum / (kTwoPi<double> * static_cast<double>(n_turns));
}

double secondary_tune(std::span<const Vector2d> strobe, const Vector2d& centre) {
  if (strobe.size() < 2) throw DomainError("secondary tune needs at least two stroboscopic samples");
  double sum = 0;
  for (std::size_t j = 1; j < strobe.size(); ++j) {
    const Vector2d a = strobe[j - 1] - centre;
    const Vector2d b = strobe[j] - centre;
    if (a.isZero() || b.isZero()) throw UndefinedAngle("stroboscopic sample at the centre, phase advance undefined");
    sum += phase_advance(a, b);
  }
  return sum / (kTwoPi<double> * static_cast<double>(strobe.size() - 1));
}

double secondary_tune(std::span<const Vector2d> samples, int stride, int offset, const Vector2d& centre) {
  if (stride <= 0 || offset < 0) throw DomainError("invalid stride or offset");
  std::vector<Vector2d> strobe;
  for (std::size_t i = static_cast<std::size_t>(offset); i < samples.size(); i += static_cast<std::size_t>(stride))
    strobe.push_back(samples[i]);
  return secondary_tune(strobe, centre);
}

namespace {

// Phase of (a, b) split as k pi/2 + phase(re, im) with |phase(re, im)| <= pi/4 and k in
// [-2, 2], consistent with atan2(b, a) in (-pi, pi].
inline int reduce_quarter(double a, double b, double& re, double& im) {
  const double aa = std::abs(a), ab = std::abs(b);
  if (a >= ab) {
    re = a;
    im = b;
    return 0;
  }
  if (b >= aa) {
    re = b;
    im = -a;
    return 1;
  }
  if (-b >= aa) {
    re = -b;
    im = a;
    return -1;
  }
  re = -a;
  im = -b;
  return b >= 0 ? 2 : -2;
}

// Sum of phase advances without one atan2 per term: reduced ratios are multiplied in
// blocks of four (total phase below pi) and the block phase is taken once.
struct PhaseAccumulator {
  double pr = 1, pi = 0, sum = 0;
  std::int64_t quarters = 0;
  int block = 0;

  void add(double dot, double cross) {
    double re, im;
    quarters += reduce_quarter(dot, cross, re, im);
    const double t = pr * re - pi * im;
    pi = pr * im + pi * re;
    pr = t;
    if (++block == 4) flush();
  }
  void flush() {
    sum += std::atan2(pi, pr);
    pr = 1;
    pi = 0;
    block = 0;
  }
  double total() {
    flush();
    return sum + static_cast<double>(quarters) * (kPi<double> / 2);
  }
};

constexpr int kLanes = 8;

}  // namespace

Classification classify(const ParticleState<double>& initial, const MapParams<double>& params,
                        const ClassifierConfig& config, std::int64_t start_turn) {
  return classify(initial, FrozenMap<double>(params), config, start_turn);
}

Classification classify(const ParticleState<double>& initial, const FrozenMap<double>& map,
                        const ClassifierConfig& config, std::int64_t start_turn) {
  const ParticleState<double> one[1] = {initial};
  return classify_batch(one, map, config, start_turn).front();
}

std::vector<Classification> classify_batch(std::span<const ParticleState<double>> initial,
                                           const FrozenMap<double>& map, const ClassifierConfig& config,
                                           std::int64_t start_turn) {
  const std::int64_t nt = config.n_turns;
  if (nt < 8) throw DomainError("classification needs at least 8 turns");
  const int phase = config.section_phase & 3;
  const bool fast = map.constant_exciter();
  const double c = map.cos_w0(), s = map.sin_w0(), kappa = map.params().kappa;
  const std::size_t m_max = static_cast<std::size_t>(nt / 4 + 2);

  std::vector<Classification> out(initial.size());
  std::vector<double> sx(kLanes * m_max), sp(kLanes * m_max);

  for (std::size_t first = 0; first < initial.size(); first += kLanes) {
    // Unused lanes repeat the last particle so that every lane runs identical arithmetic.
    double x[kLanes], p[kLanes];
    bool escaped[kLanes] = {};
    double pr[kLanes], pi[kLanes], phase_sum[kLanes];
    std::int64_t quarters[kLanes];
    for (int l = 0; l < kLanes; ++l) {
      pr[l] = 1;
      pi[l] = 0;
      phase_sum[l] = 0;
      quarters[l] = 0;
    }
    auto accumulate = [&](int l, double dot, double cross) {
      double re, im;
      quarters[l] += reduce_quarter(dot, cross, re, im);
      const double t = pr[l] * re - pi[l] * im;
      pi[l] = pr[l] * im + pi[l] * re;
      pr[l] = t;
    };
    auto flush = [&] {
      for (int l = 0; l < kLanes; ++l) {
        phase_sum[l] += std::atan2(pi[l], pr[l]);
        pr[l] = 1;
        pi[l] = 0;
      }
    };
    for (int l = 0; l < kLanes; ++l) {
      const auto& q = initial[std::min(first + l, initial.size() - 1)];
      x[l] = q.x();
      p[l] = q.y();
    }
    std::size_t m = 0;
    const double r2 = map.params().escape_radius * map.params().escape_radius;
    for (std::int64_t i = 0; i < nt; ++i) {
      const std::int64_t n = start_turn + i;
      if ((n & 3) == phase) {
        for (int l = 0; l < kLanes; ++l) {
          sx[l * m_max + m] = x[l];
          sp[l * m_max + m] = p[l];
        }
        ++m;
      }
      if (fast) {
        const double e = map.exciter_kick(static_cast<int>(n & 3));
        for (int l = 0; l < kLanes; ++l) {
          const double x0 = x[l], p0 = p[l];
          const double kicked = p0 + x0 * x0 * (1 + kappa * x0) + e;
          const double nx = c * x0 + s * kicked;
          const double np = -s * x0 + c * kicked;
          accumulate(l, nx * x0 + np * p0, nx * p0 - x0 * np);
          x[l] = nx;
          p[l] = np;
        }
      } else {
        for (int l = 0; l < kLanes; ++l) {
          const double x0 = x[l], p0 = p[l];
          map.apply(x[l], p[l], n);
          accumulate(l, x[l] * x0 + p[l] * p0, x[l] * p0 - x0 * p[l]);
        }
      }
      if ((i & 3) == 3) flush();
      bool any = false;
      for (int l = 0; l < kLanes; ++l) any |= !(x[l] * x[l] + p[l] * p[l] <= r2);
      if (any) {
        int alive = 0;
        for (int l = 0; l < kLanes; ++l) {
          if (!(x[l] * x[l] + p[l] * p[l] <= r2)) escaped[l] = true;
          if (escaped[l])
            x[l] = p[l] = 0.5;  // parked, result discarded
          else
            ++alive;
        }
        if (alive == 0) break;
      }
    }

    flush();
    for (int l = 0; l < kLanes && first + l < initial.size(); ++l) {
      Classification& r = out[first + l];
      if (escaped[l]) {
        r.escaped = true;
        continue;
      }
      const double advance = phase_sum[l] + static_cast<double>(quarters[l]) * (kPi<double> / 2);
      r.tunes.nu0 = advance / (kTwoPi<double> * static_cast<double>(nt));
      const double* lx = &sx[l * m_max];
      const double* lp = &sp[l * m_max];
      double cx = 0, cp = 0;
      for (std::size_t j = 0; j < m; ++j) {
        cx += lx[j];
        cp += lp[j];
      }
      cx /= static_cast<double>(m);
      cp /= static_cast<double>(m);
      r.centroid = {cx, cp};

      double spread = 0;
      for (std::size_t j = 0; j < m; ++j) spread = std::max(spread, std::hypot(lx[j] - cx, lp[j] - cp));
      double nu1 = 0;
      if (m > 1 && spread > 1e-10 * std::max(std::hypot(cx, cp), 1e-12)) {
        PhaseAccumulator a1;
        for (std::size_t j = 1; j < m; ++j) {
          const double a = lx[j] - cx, b = lp[j] - cp, a0 = lx[j - 1] - cx, b0 = lp[j - 1] - cp;
          a1.add(a * a0 + b * b0, a * b0 - a0 * b);
        }
        nu1 = a1.total() / (kTwoPi<double> * static_cast<double>(m - 1));
      }
      r.tunes.nu1 = nu1;

      const double off = std::abs(r.tunes.nu0 - 0.25);
      r.indeterminate = off < config.core_tolerance() && std::abs(nu1) < config.nu1_tolerance();
      if (nu1 > 0 && off < config.core_tolerance())
        r.label = RegionLabel::Core;
      else if (nu1 > 0 || off >= config.island_tolerance())
        r.label = RegionLabel::External;
      else
        r.label = island_from_angle(std::atan2(cp, cx));
    }
  }
  return out;
}

}  // namespace dres
