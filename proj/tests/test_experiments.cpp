#include <doctest.h>

#include "dres/experiments.hpp"
#include "dres/parallel.hpp"
#include "dres/rng.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>

using namespace dres;

namespace {

ProtocolSpec small_protocol() {
  ProtocolSpec p = StudyDefaults::desk().protocol;
  p.N = 1500;
  p.classifier.n_turns = 1024;
  return p;
}

}  // namespace

TEST_CASE("counter generator is a pure function of its inputs") {
  const CounterRng a(5, 9), b(5, 9), c(5, 10);
  CHECK(a.bits(3) == b.bits(3));
  CHECK(a.bits(3) != c.bits(3));
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = a.uniform(i);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    s += u;
    s2 += u * u;
  }
  CHECK(std::abs(s / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(s2 / n - 1.0 / 3) < 0.005);
}

TEST_CASE("normal pairs have unit variance and no correlation") {
  const CounterRng r(1, 2);
  double sx = 0, sxx = 0, sxy = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    double z0, z1;
    r.normal_pair(k, z0, z1);
    sx += z0;
    sxx += z0 * z0;
    sxy += z0 * z1;
  }
  CHECK(std::abs(sx / n) < 4 / std::sqrt(double(n)));
  CHECK(std::abs(sxx / n - 1) < 0.02);
  CHECK(std::abs(sxy / n) < 0.02);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; }, 7);
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(100, 3,
                               [](std::size_t i) {
                                 if (i == 42) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("normal distribution has the requested mean action") {
  const auto pts = generate_distribution(DistributionSpec::normal(0.01, 40000, 3));
  double J = 0;
  for (const auto& q : pts) J += q.squaredNorm() / 2;
  J /= pts.size();
  // J is exponential with mean and standard deviation J_avg.
  CHECK(std::abs(J - 0.01) < 4 * 0.01 / std::sqrt(40000.0));
  CHECK(generate_distribution(DistributionSpec::normal(0.01, 10, 3)) ==
        std::vector<Vector2d>(pts.begin(), pts.begin() + 10));
}

TEST_CASE("annular bins stay inside their amplitude range") {
  const auto spec = DistributionSpec::amplitude_bin(0.05, 0.06, 5000, 8);
  CHECK(spec.mean_action() == doctest::Approx((0.05 * 0.05 + 0.06 * 0.06) / 4));
  double J = 0;
  for (const auto& q : generate_distribution(spec)) {
    CHECK(q.norm() >= 0.05 - 1e-15);
    CHECK(q.norm() <= 0.06 + 1e-15);
    J += q.squaredNorm() / 2;
  }
  CHECK(J / 5000 == doctest::Approx(spec.mean_action()).epsilon(0.01));
  DistributionSpec bad = spec;
  bad.j_max = bad.j_min;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("protocol schedule ramps epsilon then sweeps delta") {
  const ProtocolSpec p = StudyDefaults::desk().protocol;
  const auto s = p.schedule();
  REQUIRE(s.segments.size() == 2);
  CHECK(s.n_total == 2 * p.N);
  CHECK(s.params_at(0, p.base).epsilon == 0.0);
  CHECK(s.params_at(p.N, p.base).epsilon == p.epsilon);
  CHECK(s.params_at(p.N, p.base).delta == -p.delta);
  const auto fin = s.final_params(p.base);
  CHECK(fin.delta == p.delta);
  CHECK(p.final_params().epsilon == p.epsilon);
  ProtocolSpec bad = p;
  bad.N = 0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("study defaults") {
  const auto d = StudyDefaults::desk(), f = StudyDefaults::full();
  CHECK(d.protocol.N == 10000);
  CHECK(f.protocol.N == 100000);
  CHECK(d.particles == 500);
  CHECK(f.particles == 3000);
  CHECK(d.protocol.epsilon == 1e-4);
  CHECK(d.protocol.delta / kTwoPi<double> == doctest::Approx(5e-4));
  CHECK(d.protocol.base.kappa == 0.1);
  CHECK(d.J_avg == 0.01);
}

TEST_CASE("trapping labels do not depend on the thread count") {
  auto p = small_protocol();
  const auto pts = generate_distribution(DistributionSpec::normal(0.01, 150, 4));
  p.threads = 1;
  const auto a = trap_labels(pts, p);
  p.threads = 4;
  const auto b = trap_labels(pts, p);
  CHECK(a == b);
}

TEST_CASE("trap report fractions are consistent") {
  const auto r = run_trapping(DistributionSpec::normal(0.01, 120, 2), small_protocol());
  CHECK(r.particles == 120);
  CHECK(std::accumulate(r.fraction.begin(), r.fraction.end(), 0.0) == doctest::Approx(1.0));
  CHECK(std::accumulate(r.count.begin(), r.count.end(), std::int64_t{0}) == 120);
  CHECK(r.escaped <= r.count[idx(RegionLabel::External)]);
  CHECK(r.dominant_share >= r.east_share - 1e-12);
  CHECK(r.island_fraction() <= 1.0);
}

TEST_CASE("histogram bins tile the amplitude range") {
  const auto rows = amplitude_histogram(small_protocol(), 0.0, 0.05, 0.01, 10, 1);
  REQUIRE(rows.size() == 5);
  CHECK(rows.front().a_min == 0.0);
  CHECK(rows.back().a_max == doctest::Approx(0.05));
  CHECK(rows[0].report.seed != rows[1].report.seed);
  CHECK_THROWS_AS(amplitude_histogram(small_protocol(), 0.1, 0.05, 0.01, 10, 1), DomainError);
}

TEST_CASE("scan axes round-trip through their names") {
  for (ScanAxis a : {ScanAxis::Epsilon, ScanAxis::Delta, ScanAxis::N, ScanAxis::Kappa, ScanAxis::Psi0, ScanAxis::JAvg})
    CHECK(scan_axis_from_string(to_string(a)) == a);
  CHECK_THROWS_AS(scan_axis_from_string("omega"), DomainError);
}

TEST_CASE("without exciter the four islands are statistically equivalent") {
  StudyDefaults d = StudyDefaults::desk();
  d.protocol.N = 3000;
  d.protocol.classifier.n_turns = 1024;
  d.particles = 400;
  const std::vector<double> J{0.01};
  const auto rows = compare_henon(J, d);
  REQUIRE(rows.size() == 1);
  const auto& h = rows[0].henon;
  const double mean = h.island_fraction() / 4;
  for (RegionLabel l : kIslands) {
    const double se = std::sqrt(std::max(mean * (1 - mean), 1e-4) / h.particles);
    CHECK(std::abs(h[l] - mean) < 5 * se);
  }
}
