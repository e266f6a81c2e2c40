#include <doctest.h>

#include "dres/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Geometry>

using namespace dres;

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

// Discriminant of c3 X^3 + c1 X + c0; positive means three distinct real roots.
double discriminant(double c3, double c1, double c0) { return -4 * c3 * c1 * c1 * c1 - 27 * c3 * c3 * c0 * c0; }

Matrix2d fd_hessian(const Vector2d& q, const HamiltonianParams<double>& h) {
  const double e = 1e-5;
  Matrix2d m;
  for (int j = 0; j < 2; ++j) {
    Vector2d d = Vector2d::Zero();
    d[j] = e;
    m.col(j) = (hamiltonian_gradient(Vector2d(q + d), h) - hamiltonian_gradient(Vector2d(q - d), h)) / (2 * e);
  }
  return m;
}

}  // namespace

TEST_CASE("kappa coefficients reduce to the two quartic combinations") {
  for (double k : {0.05, 0.1, 0.3, 0.7}) {
    const auto c = coefficients(k);
    CHECK(c.Omega2 / 2 + c.A == doctest::Approx(-k / 4));
    CHECK(c.Omega2 / 2 - 3 * c.A == doctest::Approx(-0.25));
  }
}

TEST_CASE("Cartesian form equals the action-angle form") {
  const auto h = HamiltonianParams<double>::from_kappa(0.01, 1e-3, 0.1, 0.4);
  for (double J : {0.001, 0.01, 0.05})
    for (double th = -3; th < 3; th += 0.7) {
      const double r = std::sqrt(2 * J);
      const double aa = h.delta * J + J * J * (h.Omega2 / 2 + h.A * std::cos(4 * th)) +
                        h.epsilon / 2 * r * std::cos(th + h.psi0);
      CHECK(hamiltonian_value(r * std::cos(th), r * std::sin(th), h) == doctest::Approx(aa).epsilon(1e-12));
    }
}

TEST_CASE("gradient and hessian agree with finite differences") {
  const auto h = HamiltonianParams<double>::from_kappa(0.02, 1e-3, 0.2, 0.9);
  for (const Vector2d& q : {Vector2d(0.1, 0.2), Vector2d(-0.3, 0.05), Vector2d(0.0, -0.25)}) {
    const double e = 1e-6;
    const Vector2d fd((hamiltonian_value(Vector2d(q + Vector2d(e, 0)), h) -
                       hamiltonian_value(Vector2d(q - Vector2d(e, 0)), h)) / (2 * e),
                      (hamiltonian_value(Vector2d(q + Vector2d(0, e)), h) -
                       hamiltonian_value(Vector2d(q - Vector2d(0, e)), h)) / (2 * e));
    CHECK((fd - hamiltonian_gradient(q, h)).norm() < 1e-9);
    CHECK((fd_hessian(q, h) - hamiltonian_hessian(q, h)).norm() < 1e-8);
  }
}

TEST_CASE("critical values at kappa = 0.1") {
  const auto cd = critical_deltas(0.1);
  CHECK(std::abs(cd.delta_hat_1 - 0.348) < 1e-3);
  CHECK(std::abs(cd.delta_hat_2 - 0.179) < 1e-3);
}

TEST_CASE("critical values are the discriminant sign changes") {
  for (double kappa : {0.05, 0.1, 0.2, 0.3}) {
    const double a = -kappa / 4, b = -0.25;
    // eps = 1 so delta is delta_hat.
    const auto on = [&](double d) { return discriminant(a, d, 0.5); };
    const auto off = [&](double d) { return discriminant((a * a - b * b) / a, d * (a - b) / a, 0.5); };
    const auto cd = critical_deltas(kappa);
    CHECK(std::abs(bisect(on, 1e-6, 5.0) - cd.delta_hat_1) < 1e-6);
    CHECK(std::abs(bisect(off, 1e-6, 5.0) - cd.delta_hat_2) < 1e-6);
  }
}

TEST_CASE("real cubic roots recover constructed roots") {
  for (double r1 : {-1.3, -0.2, 0.4})
    for (double r2 : {-0.7, 0.1, 0.9}) {
      const double r3 = -r1 - r2;
      if (std::abs(r1 - r2) < 1e-3 || std::abs(r1 - r3) < 1e-3 || std::abs(r2 - r3) < 1e-3) continue;
      // (X - r1)(X - r2)(X - r3) with r1 + r2 + r3 = 0, scaled by 2.
      const double c1 = 2 * (r1 * r2 + r1 * r3 + r2 * r3), c0 = -2 * r1 * r2 * r3;
      auto roots = real_cubic_roots({2.0, c1, c0});
      std::vector<double> want{r1, r2, r3};
      std::sort(want.begin(), want.end());
      REQUIRE(roots.size() == 3);
      for (int i = 0; i < 3; ++i) CHECK(roots[i] == doctest::Approx(want[i]).epsilon(1e-10));
    }
  CHECK(real_cubic_roots({1.0, 1.0, 1.0}).size() == 1);
}

TEST_CASE("printed and derived on-axis cubics differ only in the cubic coefficient") {
  const auto h = HamiltonianParams<double>::from_kappa(0.01, 1e-4, 0.1);
  const auto derived = on_axis_cubic(h), printed = printed_on_axis_cubic(h);
  MESSAGE("derived X^3 coefficient " << derived[0] << ", printed " << printed[0]);
  CHECK(derived[0] == doctest::Approx(-0.1 / 4));
  CHECK(printed[0] == doctest::Approx(-0.1 / 3));
  CHECK(derived[1] == printed[1]);
  CHECK(derived[2] == printed[2]);
}

TEST_CASE("topologies at kappa = 0.1") {
  const double eps = 1e-4, unit = std::pow(eps, 2.0 / 3.0);
  struct Case {
    double dh;
    Topology topo;
    std::size_t on, off;
  };
  for (const Case c : {Case{0.1, Topology::SingleIsland, 1, 0}, Case{0.25, Topology::ThreeIslands, 1, 4},
                       Case{1.0, Topology::FullStructure, 3, 6}, Case{3.0, Topology::FullStructure, 3, 6}}) {
    CAPTURE(c.dh);
    const auto h = HamiltonianParams<double>::from_kappa(c.dh * unit, eps, 0.1);
    const auto fp = fixed_points(h);
    CHECK(fp.topology == c.topo);
    CHECK(topology_for(c.dh, 0.1) == c.topo);
    CHECK(fp.on_axis.size() == c.on);
    CHECK(fp.off_axis.size() == c.off);
    for (const auto& f : fp.all()) {
      // Stationary to round-off, measured in units of the gradient scale eps.
      CHECK(hamiltonian_gradient(f.position, h).norm() / eps < 1e-9);
      const double det = fd_hessian(f.position, h).determinant();
      CHECK((det > 0) == (f.stability == Stability::Elliptic));
    }
  }
}

TEST_CASE("full structure has five elliptic and four hyperbolic points") {
  const auto h = HamiltonianParams<double>::from_kappa(std::pow(1e-4, 2.0 / 3.0), 1e-4, 0.1);
  const auto fp = fixed_points(h);
  CHECK(fp.elliptic().size() == 5);
  CHECK(fp.hyperbolic().size() == 4);
  // Index count on the plane: elliptic - hyperbolic = 1.
  CHECK(static_cast<int>(fp.elliptic().size()) - static_cast<int>(fp.hyperbolic().size()) == 1);
}

TEST_CASE("fixed-point actions scale as eps^(2/3)") {
  const double eps = 1e-4;
  auto actions = [](double e) {
    const auto fp = fixed_points(HamiltonianParams<double>::from_kappa(std::pow(e, 2.0 / 3.0), e, 0.1));
    std::vector<double> J;
    for (const auto& f : fp.all()) J.push_back(f.action());
    std::sort(J.begin(), J.end());
    return J;
  };
  const auto a = actions(eps), b = actions(8 * eps);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(b[i] / a[i] / 4.0 - 1.0) < 1e-6);
}

TEST_CASE("scaling helpers are mutually inverse") {
  const auto h = HamiltonianParams<double>::from_kappa(3e-3, 2e-4, 0.15, 0.3);
  const auto s = scale_params(h);
  const auto back = unscale_params(s, h.epsilon);
  CHECK(back.delta == doctest::Approx(h.delta));
  CHECK(back.kappa == h.kappa);
  CHECK(unscale_action(scale_action(0.01, 2e-4), 2e-4) == doctest::Approx(0.01));
  CHECK(coordinate_scale(8e-3) == doctest::Approx(0.2));
}

TEST_CASE("a quarter-turn of psi0 rotates the fixed points by a quarter-turn") {
  const double eps = 1e-4, unit = std::pow(eps, 2.0 / 3.0);
  const auto base = fixed_points(HamiltonianParams<double>::from_kappa(unit, eps, 0.1, 0.0)).all();
  const auto turned = fixed_points(HamiltonianParams<double>::from_kappa(unit, eps, 0.1, kPi<double> / 2)).all();
  REQUIRE(turned.size() == base.size());
  for (const auto& f : base) {
    const Vector2d want(f.position.y(), -f.position.x());
    double best = 1e9;
    for (const auto& g : turned) best = std::min(best, (g.position - want).norm());
    CHECK(best < 1e-9);
  }
}

TEST_CASE("fixed points at arbitrary psi0 are stationary and index-balanced") {
  const double eps = 1e-4, unit = std::pow(eps, 2.0 / 3.0);
  for (double dh : {0.25, 0.75, 2.0})
    for (double psi : {0.2, kPi<double> / 8, kPi<double> / 4, 1.0, 2.5}) {
      CAPTURE(dh);
      CAPTURE(psi);
      const auto h = HamiltonianParams<double>::from_kappa(dh * unit, eps, 0.1, psi);
      const auto fp = fixed_points(h);
      for (const auto& f : fp.all()) CHECK(hamiltonian_gradient(f.position, h).norm() / eps < 1e-9);
      // H -> -infinity at large radius, so the indices (+1 elliptic, -1 hyperbolic) sum to 1.
      CHECK(static_cast<int>(fp.elliptic().size()) - static_cast<int>(fp.hyperbolic().size()) == 1);
    }
}

TEST_CASE("separatrix loops lie on the saddle level") {
  const double eps = 1e-4, unit = std::pow(eps, 2.0 / 3.0);
  const auto h = HamiltonianParams<double>::from_kappa(0.25 * unit, eps, 0.1);
  const auto fp = fixed_points(h);
  REQUIRE_FALSE(fp.hyperbolic().empty());
  const auto sep = separatrix_trace(h, fp.hyperbolic().front().position);
  CHECK(sep.loops.size() == 3);
  const double scale = std::abs(sep.level) + eps * std::pow(eps, 1.0 / 3.0);
  for (const auto& loop : sep.loops) {
    CHECK(std::abs(shoelace_area<double>(loop)) > 0);
    for (const auto& q : loop) CHECK(std::abs(hamiltonian_value(q, h) - sep.level) < 1e-6 * scale);
  }
  CHECK(structure_extent(h) >= sep.max_radius() - 1e-12);
}

TEST_CASE("out-of-range kappa is rejected") {
  CHECK_THROWS_AS(critical_deltas(0.0), DomainError);
  CHECK_THROWS_AS(fixed_points(HamiltonianParams<double>::from_kappa(1e-3, 1e-4, 1.5)), TopologyUnsupported);
}

TEST_CASE("stability classification of simple matrices") {
  CHECK(classify_stability(Matrix2d::Identity()) == Stability::Elliptic);
  CHECK(classify_stability(Vector2d(1, -1).asDiagonal().toDenseMatrix()) == Stability::Hyperbolic);
  CHECK(classify_stability(Matrix2d::Zero()) == Stability::Degenerate);
}
