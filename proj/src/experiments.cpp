#include "dres/experiments.hpp"

#include "dres/parallel.hpp"
#include "dres/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace dres {

DistributionSpec DistributionSpec::normal(double J_avg, std::size_t count, std::uint64_t seed) {
  DistributionSpec s;
  s.kind = DistributionKind::BivariateNormal;
  s.sigma_x = s.sigma_p = std::sqrt(J_avg);
  s.count = count;
  s.seed = seed;
  return s;
}

DistributionSpec DistributionSpec::amplitude_bin(double a_min, double a_max, std::size_t count, std::uint64_t seed) {
  DistributionSpec s;
  s.kind = DistributionKind::AnnularUniform;
  s.j_min = a_min * a_min / 2;
  s.j_max = a_max * a_max / 2;
  s.count = count;
  s.seed = seed;
  return s;
}

void DistributionSpec::validate() const {
  if (kind == DistributionKind::BivariateNormal) {
    if (!(sigma_x > 0 && sigma_p > 0)) throw DomainError("normal distribution needs sigma_x, sigma_p > 0");
  } else {
    if (!(j_min >= 0 && j_max > j_min)) throw DomainError("annular distribution needs 0 <= j_min < j_max");
  }
}

double DistributionSpec::mean_action() const {
  return kind == DistributionKind::BivariateNormal ? (sigma_x * sigma_x + sigma_p * sigma_p) / 2
                                                   : (j_min + j_max) / 2;
}

std::vector<ParticleState<double>> generate_distribution(const DistributionSpec& spec) {
  spec.validate();
  std::vector<ParticleState<double>> out(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    const CounterRng rng(spec.seed, i);
    if (spec.kind == DistributionKind::BivariateNormal) {
      double z0, z1;
      rng.normal_pair(0, z0, z1);
      out[i] = {spec.sigma_x * z0, spec.sigma_p * z1};
    } else {
      const double J = spec.j_min + (spec.j_max - spec.j_min) * rng.uniform(0);
      const double theta = kTwoPi<double> * rng.uniform(1);
      const double r = std::sqrt(2 * J);
      out[i] = {r * std::cos(theta), r * std::sin(theta)};
    }
  }
  return out;
}

void ProtocolSpec::validate() const {
  if (N < 1) throw DomainError("protocol half-length N must be >= 1");
  if (!(epsilon >= 0)) throw DomainError("epsilon must be >= 0");
  if (!std::isfinite(delta)) throw DomainError("delta must be finite");
  base.validate();
}

ModulationSchedule<double> ProtocolSpec::schedule() const {
  validate();
  ModulationSchedule<double> s;
  s.n_total = 2 * N;
  s.segments.push_back({0, N, 0.0, epsilon, -delta, -delta, 0.0, 0.0});
  s.segments.push_back({N, 2 * N, epsilon, epsilon, -delta, delta, 0.0, 0.0});
  return s;
}

MapParams<double> ProtocolSpec::final_params() const {
  MapParams<double> p = base;
  p.epsilon = epsilon;
  p.delta = delta;
  p.Delta = 0;
  return p;
}

StudyDefaults StudyDefaults::desk() {
  StudyDefaults d;
  d.protocol.N = 10000;
  d.protocol.epsilon = 1e-4;
  d.protocol.delta = kTwoPi<double> * 5e-4;
  d.protocol.base = make_map_params(0.0, 0.0, 0.1, 0.0);
  d.J_avg = 0.01;
  d.particles = 500;
  return d;
}

StudyDefaults StudyDefaults::full() {
  StudyDefaults d = desk();
  d.protocol.N = 100000;
  d.particles = 3000;
  return d;
}

double TrapReport::island_fraction() const {
  double s = 0;
  for (RegionLabel l : kIslands) s += fraction[idx(l)];
  return s;
}

std::vector<RegionLabel> trap_labels(std::span<const ParticleState<double>> particles, const ProtocolSpec& protocol,
                                     std::int64_t* escaped, std::int64_t* indeterminate) {
  const ScheduleTable<double> table(protocol.schedule(), protocol.base);
  const FrozenMap<double> final_map(protocol.final_params());
  const std::int64_t start = 2 * protocol.N;
  constexpr std::size_t chunk = 64;
  const std::size_t n_chunks = (particles.size() + chunk - 1) / chunk;
  std::vector<RegionLabel> labels(particles.size(), RegionLabel::External);
  std::vector<std::uint8_t> esc(particles.size(), 0), ind(particles.size(), 0);
  parallel_for(n_chunks, protocol.threads, [&](std::size_t c) {
    const std::size_t lo = c * chunk, hi = std::min(particles.size(), lo + chunk);
    const auto tracked = iterate_batch(particles.subspan(lo, hi - lo), table);
    std::vector<ParticleState<double>> survivors;
    std::vector<std::size_t> where;
    for (std::size_t k = 0; k < tracked.size(); ++k) {
      if (tracked[k].escaped()) {
        esc[lo + k] = 1;
      } else {
        survivors.push_back(tracked[k].state);
        where.push_back(lo + k);
      }
    }
    const auto cls = classify_batch(survivors, final_map, protocol.classifier, start);
    for (std::size_t k = 0; k < cls.size(); ++k) {
      labels[where[k]] = cls[k].label;
      esc[where[k]] = cls[k].escaped;
      ind[where[k]] = cls[k].indeterminate;
    }
  });
  if (escaped) *escaped = std::count(esc.begin(), esc.end(), 1);
  if (indeterminate) *indeterminate = std::count(ind.begin(), ind.end(), 1);
  return labels;
}

TrapReport run_trapping(const DistributionSpec& dist, const ProtocolSpec& protocol) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto particles = generate_distribution(dist);
  TrapReport r;
  r.distribution = dist;
  r.protocol = protocol;
  r.seed = dist.seed;
  r.particles = static_cast<std::int64_t>(particles.size());
  const auto labels = trap_labels(particles, protocol, &r.escaped, &r.indeterminate);
  for (RegionLabel l : labels) ++r.count[idx(l)];
  const double n = static_cast<double>(std::max<std::int64_t>(r.particles, 1));
  for (std::size_t k = 0; k < kRegionCount; ++k) r.fraction[k] = static_cast<double>(r.count[k]) / n;
  r.escaped_fraction = static_cast<double>(r.escaped) / n;
  std::int64_t islands = 0, best = -1;
  for (RegionLabel l : kIslands) {
    islands += r.count[idx(l)];
    if (r.count[idx(l)] > best) {
      best = r.count[idx(l)];
      r.dominant = l;
    }
  }
  r.east_share = islands > 0 ? static_cast<double>(r.count[idx(RegionLabel::East)]) / islands : 0.0;
  r.dominant_share = islands > 0 ? static_cast<double>(best) / islands : 0.0;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<HistogramRow> amplitude_histogram(const ProtocolSpec& protocol, double a_min, double a_max,
                                              double bin_width, std::size_t per_bin, std::uint64_t seed) {
  if (!(bin_width > 0)) throw DomainError("bin width must be positive");
  if (!(a_min >= 0 && a_max > a_min)) throw DomainError("amplitude range must satisfy 0 <= a_min < a_max");
  std::vector<HistogramRow> rows;
  const auto n_bins = static_cast<std::size_t>(std::ceil((a_max - a_min) / bin_width - 1e-9));
  for (std::size_t b = 0; b < n_bins; ++b) {
    HistogramRow row;
    row.a_min = a_min + static_cast<double>(b) * bin_width;
    row.a_max = row.a_min + bin_width;
    // Each bin draws from its own seed so that bins are independent samples.
    row.report = run_trapping(DistributionSpec::amplitude_bin(row.a_min, row.a_max, per_bin, mix64(seed + b)),
                              protocol);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string_view to_string(ScanAxis a) {
  switch (a) {
    case ScanAxis::Epsilon: return "epsilon";
    case ScanAxis::Delta: return "delta";
    case ScanAxis::N: return "N";
    case ScanAxis::Kappa: return "kappa";
    case ScanAxis::Psi0: return "psi0";
    case ScanAxis::JAvg: return "J_avg";
  }
  return "?";
}

ScanAxis scan_axis_from_string(std::string_view s) {
  for (ScanAxis a : {ScanAxis::Epsilon, ScanAxis::Delta, ScanAxis::N, ScanAxis::Kappa, ScanAxis::Psi0, ScanAxis::JAvg})
    if (to_string(a) == s) return a;
  throw DomainError("unknown scan axis '" + std::string(s) + "'");
}

std::vector<ScanRow> parameter_scan(ScanAxis axis, std::span<const double> grid, const StudyDefaults& defaults) {
  std::vector<ScanRow> rows;
  for (double v : grid) {
    ProtocolSpec p = defaults.protocol;
    double J = defaults.J_avg;
    switch (axis) {
      case ScanAxis::Epsilon: p.epsilon = v; break;
      case ScanAxis::Delta: p.delta = v; break;
      case ScanAxis::N: p.N = static_cast<std::int64_t>(std::llround(v)); break;
      case ScanAxis::Kappa: p.base.kappa = v; break;
      case ScanAxis::Psi0: p.base.psi0 = v; break;
      case ScanAxis::JAvg: J = v; break;
    }
    rows.push_back({v, run_trapping(DistributionSpec::normal(J, defaults.particles, defaults.seed), p)});
  }
  return rows;
}

std::vector<CompareRow> compare_henon(std::span<const double> J_grid, const StudyDefaults& defaults) {
  std::vector<CompareRow> rows;
  for (double J : J_grid) {
    const auto dist = DistributionSpec::normal(J, defaults.particles, defaults.seed);
    ProtocolSpec henon = defaults.protocol;
    henon.epsilon = 0;
    rows.push_back({J, run_trapping(dist, defaults.protocol), run_trapping(dist, henon)});
  }
  return rows;
}

}  // namespace dres
