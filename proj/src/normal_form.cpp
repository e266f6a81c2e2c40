#include "dres/normal_form.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace dres {

namespace {

void require_kappa(double kappa) {
  if (!(kappa > 0 && kappa < 1))
    throw TopologyUnsupported("fixed-point analysis requires 0 < kappa < 1, got kappa = " +
                              std::to_string(kappa));
}

double cubic_value(const CubicCoefficients& c, double x) { return (c[0] * x * x + c[1]) * x + c[2]; }

double polish_cubic_root(const CubicCoefficients& c, double x) {
  for (int i = 0; i < 3; ++i) {
    const double d = 3 * c[0] * x * x + c[1];
    if (d == 0) break;
    const double next = x - cubic_value(c, x) / d;
    if (!std::isfinite(next)) break;
    if (std::abs(cubic_value(c, next)) >= std::abs(cubic_value(c, x))) break;
    x = next;
  }
  return x;
}

// Newton on grad H = 0.
Vector2d newton_stationary(Vector2d q, const HamiltonianParams<double>& h, int max_iter = 30) {
  for (int i = 0; i < max_iter; ++i) {
    const Vector2d g = hamiltonian_gradient(q, h);
    const Matrix2d m = hamiltonian_hessian(q, h);
    const double det = m.determinant();
    if (det == 0 || !std::isfinite(det)) break;
    const Vector2d dq = m.inverse() * g;
    q -= dq;
    if (dq.norm() <= 1e-16 * std::max(q.norm(), 1e-300)) break;
  }
  return q;
}

// Stability is judged on the scaled problem, where Hessian entries are O(1).
Stability stability_at(const Vector2d& q, const HamiltonianParams<double>& h) {
  const double unit = h.epsilon > 0 ? std::pow(h.epsilon, 2.0 / 3.0) : 1.0;
  return classify_stability(hamiltonian_hessian(q, h) / unit);
}

FixedPoint make_point(const Vector2d& q, const HamiltonianParams<double>& h) {
  return {q, stability_at(q, h), hamiltonian_value(q, h), hamiltonian_gradient(q, h).norm()};
}

Topology topology_from_counts(std::size_t on_axis, std::size_t off_axis) {
  if (on_axis >= 3) return Topology::FullStructure;
  if (off_axis >= 4) return Topology::ThreeIslands;
  return Topology::SingleIsland;
}

FixedPointSet fixed_points_psi0_zero(const HamiltonianParams<double>& h) {
  FixedPointSet set;
  for (double x : real_cubic_roots(on_axis_cubic(h))) {
    // Y = 0 is exact on the axis; polish X on the gradient itself.
    Vector2d q(x, 0.0);
    for (int i = 0; i < 3; ++i) {
      const double gx = hamiltonian_gradient(q, h).x();
      const double hxx = hamiltonian_hessian(q, h)(0, 0);
      if (hxx == 0) break;
      const Vector2d next(q.x() - gx / hxx, 0.0);
      if (std::abs(hamiltonian_gradient(next, h).x()) >= std::abs(gx)) break;
      q = next;
    }
    set.on_axis.push_back(make_point(q, h));
  }
  const double scale2 = std::pow(std::max(h.epsilon, 1e-300), 2.0 / 3.0) + std::abs(h.delta);
  for (double x : real_cubic_roots(off_axis_cubic(h))) {
    const double y2 = off_axis_y_squared(x, h);
    if (!(y2 > 1e-12 * scale2)) continue;
    const double y = std::sqrt(y2);
    for (double sign : {1.0, -1.0}) {
      const Vector2d q = newton_stationary(Vector2d(x, sign * y), h, 3);
      set.off_axis.push_back(make_point(q, h));
    }
  }
  set.topology = topology_from_counts(set.on_axis.size(), set.off_axis.size());
  return set;
}

}  // namespace

CriticalDeltas critical_deltas(double kappa) {
  if (!(kappa > 0 && kappa < 1))
    throw DomainError("critical values require 0 < kappa < 1, got kappa = " + std::to_string(kappa));
  const double d1 = 0.75 * std::cbrt(kappa);
  const double d2 = 0.75 * std::cbrt(kappa * kappa * (kappa + 1) / ((kappa - 1) * (kappa - 1)));
  if (kappa < 1.0 / 3.0 && !(d2 < d1))
    throw NumericalError("expected delta_hat_2 < delta_hat_1 for kappa < 1/3");
  return {d1, d2};
}

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::Elliptic: return "elliptic";
    case Stability::Hyperbolic: return "hyperbolic";
    case Stability::Degenerate: return "degenerate";
  }
  return "?";
}

std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::SingleIsland: return "SingleIsland";
    case Topology::ThreeIslands: return "ThreeIslands";
    case Topology::FullStructure: return "FullStructure";
  }
  return "?";
}

std::vector<FixedPoint> FixedPointSet::all() const {
  std::vector<FixedPoint> out = on_axis;
  out.insert(out.end(), off_axis.begin(), off_axis.end());
  return out;
}

std::vector<FixedPoint> FixedPointSet::hyperbolic() const {
  std::vector<FixedPoint> out;
  for (const auto& f : all())
    if (f.stability == Stability::Hyperbolic) out.push_back(f);
  return out;
}

std::vector<FixedPoint> FixedPointSet::elliptic() const {
  std::vector<FixedPoint> out;
  for (const auto& f : all())
    if (f.stability == Stability::Elliptic) out.push_back(f);
  return out;
}

CubicCoefficients on_axis_cubic(const HamiltonianParams<double>& h) {
  return {h.Omega2 / 2 + h.A, h.delta, h.epsilon / 2};
}

CubicCoefficients off_axis_cubic(const HamiltonianParams<double>& h) {
  // dH/dY = Y (delta + a Y^2 + b X^2), dH/dX = X (delta + a X^2 + b Y^2) + eps/2
  const double a = h.Omega2 / 2 + h.A;
  const double b = h.Omega2 / 2 - 3 * h.A;
  return {(a * a - b * b) / a, h.delta * (a - b) / a, h.epsilon / 2};
}

double off_axis_y_squared(double X, const HamiltonianParams<double>& h) {
  const double a = h.Omega2 / 2 + h.A;
  const double b = h.Omega2 / 2 - 3 * h.A;
  return -(h.delta + b * X * X) / a;
}

CubicCoefficients printed_on_axis_cubic(const HamiltonianParams<double>& h) {
  return {-h.kappa / 3, h.delta, h.epsilon / 2};
}

std::vector<double> real_cubic_roots(const CubicCoefficients& c) {
  std::vector<double> roots;
  if (c[0] == 0) {
    if (c[1] != 0) roots.push_back(-c[2] / c[1]);
    return roots;
  }
  // X^3 + p X + q = 0
  const double p = c[1] / c[0];
  const double q = c[2] / c[0];
  const double disc = -(4 * p * p * p + 27 * q * q);
  if (disc > 0) {
    const double m = 2 * std::sqrt(-p / 3);
    const double arg = std::clamp(3 * q / (p * m), -1.0, 1.0);
    const double phi = std::acos(arg) / 3;
    for (int k = 0; k < 3; ++k) roots.push_back(m * std::cos(phi - 2 * kPi<double> * k / 3));
  } else if (disc == 0 && p != 0) {
    roots.push_back(3 * q / p);
    roots.push_back(-3 * q / (2 * p));
  } else {
    const double s = std::sqrt(q * q / 4 + p * p * p / 27);
    roots.push_back(std::cbrt(-q / 2 + s) + std::cbrt(-q / 2 - s));
  }
  for (double& r : roots) r = polish_cubic_root(c, r);
  std::sort(roots.begin(), roots.end());
  return roots;
}

Stability classify_stability(const Matrix2d& hessian, double degenerate_tol) {
  const double det = hessian.determinant();
  if (std::abs(det) < degenerate_tol) return Stability::Degenerate;
  return det > 0 ? Stability::Elliptic : Stability::Hyperbolic;
}

FixedPointSet fixed_points(const HamiltonianParams<double>& h) {
  require_kappa(h.kappa);
  if (!(h.epsilon >= 0)) throw DomainError("epsilon must be >= 0");
  if (h.psi0 == 0 || h.epsilon == 0) return fixed_points_psi0_zero(h);

  // The quartic term only has quarter-turn symmetry, so the psi0 = 0 points rotated by
  // -psi0 are seeds, not solutions. A polar grid of extra seeds catches points that have
  // no psi0 = 0 counterpart.
  HamiltonianParams<double> h0 = h;
  h0.psi0 = 0;
  const FixedPointSet base = fixed_points_psi0_zero(h0);
  const Eigen::Rotation2D<double> rot(-h.psi0);
  double r_max = 0;
  for (const auto& f : base.all()) r_max = std::max(r_max, f.position.norm());
  const double scale = std::cbrt(std::max(h.epsilon, 1e-300));
  if (!(r_max > 0)) r_max = scale;
  const double merge_tol = 1e-7 * r_max;
  const double grad_tol = 1e-9 * std::max(h.epsilon, std::abs(h.delta) * r_max);

  std::vector<Vector2d> seeds;
  for (const auto& f : base.all()) seeds.push_back(rot * f.position);
  constexpr int n_radii = 24, n_angles = 64;
  for (int i = 1; i <= n_radii; ++i)
    for (int k = 0; k < n_angles; ++k) {
      const double r = 1.5 * r_max * i / n_radii, a = kTwoPi<double> * k / n_angles;
      seeds.emplace_back(r * std::cos(a), r * std::sin(a));
    }

  std::vector<Vector2d> found;
  for (const auto& s : seeds) {
    const Vector2d q = newton_stationary(s, h, 60);
    if (!q.allFinite() || q.norm() > 3 * r_max) continue;
    if (hamiltonian_gradient(q, h).norm() > grad_tol) continue;
    const bool dup = std::any_of(found.begin(), found.end(),
                                 [&](const Vector2d& o) { return (o - q).norm() < merge_tol; });
    if (!dup) found.push_back(q);
  }

  // The psi0 = 0 symmetry axis becomes the line at angle -psi0.
  const Vector2d axis(std::cos(h.psi0), -std::sin(h.psi0));
  FixedPointSet set;
  for (const auto& q : found) {
    const double off = std::abs(axis.x() * q.y() - axis.y() * q.x());
    (off < 1e-6 * r_max ? set.on_axis : set.off_axis).push_back(make_point(q, h));
  }
  set.topology = base.topology;
  return set;
}

Topology topology_for(double delta_hat, double kappa) {
  const auto c = critical_deltas(kappa);
  if (delta_hat > c.delta_hat_1) return Topology::FullStructure;
  if (delta_hat > c.delta_hat_2) return Topology::ThreeIslands;
  return Topology::SingleIsland;
}

ScaledParams scale_params(const HamiltonianParams<double>& h) {
  if (!(h.epsilon > 0)) throw DomainError("scaling requires epsilon > 0");
  return {h.delta / std::pow(h.epsilon, 2.0 / 3.0), h.kappa, h.psi0};
}

HamiltonianParams<double> unscale_params(const ScaledParams& s, double epsilon) {
  if (!(epsilon > 0)) throw DomainError("scaling requires epsilon > 0");
  return HamiltonianParams<double>::from_kappa(s.delta_hat * std::pow(epsilon, 2.0 / 3.0), epsilon, s.kappa,
                                               s.psi0);
}

HamiltonianParams<double> scaled_hamiltonian(const ScaledParams& s) {
  return HamiltonianParams<double>::from_kappa(s.delta_hat, 1.0, s.kappa, s.psi0);
}

double scale_action(double J, double epsilon) {
  if (!(epsilon > 0)) throw DomainError("scaling requires epsilon > 0");
  return J / std::pow(epsilon, 2.0 / 3.0);
}

double unscale_action(double J_hat, double epsilon) {
  if (!(epsilon > 0)) throw DomainError("scaling requires epsilon > 0");
  return J_hat * std::pow(epsilon, 2.0 / 3.0);
}

double coordinate_scale(double epsilon) {
  if (!(epsilon > 0)) throw DomainError("scaling requires epsilon > 0");
  return std::cbrt(epsilon);
}

// ---------------------------------------------------------------------------------------
// Separatrix tracing

namespace {

struct Tracer {
  const HamiltonianParams<double>& h;
  double level;
  double size;      // structure size
  double h_scale;   // energy scale
  TraceOptions opt;

  Vector2d tangent(const Vector2d& q) const {
    const Vector2d g = hamiltonian_gradient(q, h);
    const double n = g.norm();
    if (n == 0 || !std::isfinite(n)) return Vector2d::Zero();
    return Vector2d(-g.y(), g.x()) / n;
  }

  Vector2d correct(Vector2d q) const {
    for (int i = 0; i < 12; ++i) {
      const double f = hamiltonian_value(q, h) - level;
      if (std::abs(f) <= 1e-15 * h_scale) break;
      const Vector2d g = hamiltonian_gradient(q, h);
      const double g2 = g.squaredNorm();
      if (g2 == 0) break;
      q -= f * g / g2;
    }
    return q;
  }

  // Marches from saddles[from] along direction d until another (or the same) saddle is hit.
  SeparatrixBranch march(const std::vector<Vector2d>& saddles, int from, const Vector2d& d) const {
    const double s_min = 1e-7 * size;
    const double s_max = 2e-2 * size;
    double s = opt.initial_step > 0 ? opt.initial_step : 2e-3 * size;
    SeparatrixBranch branch;
    branch.from = from;
    branch.points.push_back(saddles[from]);
    Vector2d q = correct(saddles[from] + s * d);
    branch.points.push_back(q);
    Vector2d dir = d;
    const double snap = std::max(opt.initial_step, opt.closure_tol * size);
    std::vector<double> prev_dist(saddles.size());
    for (std::size_t k = 0; k < saddles.size(); ++k) prev_dist[k] = (q - saddles[k]).norm();
    for (int step = 0; step < opt.max_steps; ++step) {
      // Arrival at a saddle: close and still approaching.
      double nearest = std::numeric_limits<double>::infinity();
      for (int k = 0; k < static_cast<int>(saddles.size()); ++k) {
        const double dist = (q - saddles[k]).norm();
        if (dist < snap && dist < prev_dist[k]) {
          branch.points.push_back(saddles[k]);
          branch.to = k;
          return branch;
        }
        prev_dist[k] = dist;
        nearest = std::min(nearest, dist);
      }
      // Refine towards saddles where the contour turns sharply.
      s = std::max(std::min(s, 0.3 * nearest), s_min);
      Vector2d t = tangent(q);
      if (t.isZero()) throw TracingFailure("separatrix trace hit a stationary point off the saddle set");
      if (t.dot(dir) < 0) t = -t;
      while (true) {
        const Vector2d pred = q + s * t;
        const Vector2d next = correct(pred);
        Vector2d t_next = tangent(next);
        if (t_next.dot(t) < 0) t_next = -t_next;
        const double turn = std::acos(std::clamp(t.dot(t_next), -1.0, 1.0));
        const bool ok = next.allFinite() && turn <= opt.max_turn_angle && (next - pred).norm() <= 0.25 * s;
        if (ok || s <= s_min) {
          if (!next.allFinite()) throw TracingFailure("separatrix trace diverged");
          dir = (next - q).normalized();
          q = next;
          branch.points.push_back(q);
          if (turn < opt.max_turn_angle / 4) s = std::min(1.5 * s, s_max);
          break;
        }
        s /= 2;
      }
      if (q.norm() > 1e3 * size) throw TracingFailure("separatrix trace left the structure");
    }
    throw TracingFailure("separatrix trace did not close within the step limit");
  }
};

// Directions along which the Hessian quadratic form vanishes.
std::array<Vector2d, 2> null_directions(const Matrix2d& m) {
  Eigen::SelfAdjointEigenSolver<Matrix2d> es(m);
  const Vector2d l = es.eigenvalues();
  const Matrix2d v = es.eigenvectors();
  if (!(l(0) < 0 && l(1) > 0)) throw TracingFailure("trace start is not a hyperbolic point");
  const Vector2d a = std::sqrt(l(1)) * v.col(0);
  const Vector2d b = std::sqrt(-l(0)) * v.col(1);
  return {(a + b).normalized(), (a - b).normalized()};
}

bool same_branch(const SeparatrixBranch& a, const SeparatrixBranch& b, double tol) {
  const bool ends = (a.from == b.from && a.to == b.to) || (a.from == b.to && a.to == b.from);
  if (!ends) return false;
  const Vector2d mid = a.points[a.points.size() / 2];
  return distance_to_polyline<double>(mid, b.points) < tol;
}

double angle_of(const Vector2d& v) { return std::atan2(v.y(), v.x()); }

// Bounded faces of the plane graph formed by the branches.
std::vector<Polyline<double>> faces(const std::vector<SeparatrixBranch>& branches, int n_vertices) {
  const int n_half = 2 * static_cast<int>(branches.size());
  auto origin = [&](int he) { return he % 2 == 0 ? branches[he / 2].from : branches[he / 2].to; };
  auto target = [&](int he) { return he % 2 == 0 ? branches[he / 2].to : branches[he / 2].from; };
  auto out_angle = [&](int he) {
    const auto& p = branches[he / 2].points;
    return he % 2 == 0 ? angle_of(p[1] - p[0]) : angle_of(p[p.size() - 2] - p.back());
  };
  std::vector<std::vector<int>> outgoing(n_vertices);
  for (int he = 0; he < n_half; ++he) outgoing[origin(he)].push_back(he);

  auto next = [&](int he) {
    const int twin = he ^ 1;
    const int v = target(he);
    const double base = out_angle(twin);
    int best = twin;
    double best_gap = 10;
    for (int g : outgoing[v]) {
      if (g == twin) continue;
      double gap = std::remainder(out_angle(g) - base, 2 * kPi<double>);
      if (gap <= 0) gap += 2 * kPi<double>;
      if (gap < best_gap) {
        best_gap = gap;
        best = g;
      }
    }
    return best;
  };

  // Connected components over vertices.
  std::vector<int> comp(n_vertices);
  std::iota(comp.begin(), comp.end(), 0);
  std::function<int(int)> find = [&](int x) { return comp[x] == x ? x : comp[x] = find(comp[x]); };
  for (const auto& b : branches) comp[find(b.from)] = find(b.to);

  std::vector<bool> used(n_half, false);
  struct Face {
    Polyline<double> poly;
    double area;
    int component;
  };
  std::vector<Face> all;
  for (int start = 0; start < n_half; ++start) {
    if (used[start]) continue;
    Face f;
    f.component = find(origin(start));
    int he = start;
    for (int guard = 0; guard <= n_half && !used[he]; ++guard) {
      used[he] = true;
      const auto& p = branches[he / 2].points;
      if (he % 2 == 0)
        f.poly.insert(f.poly.end(), p.begin(), p.end() - 1);
      else
        f.poly.insert(f.poly.end(), p.rbegin(), p.rend() - 1);
      he = next(he);
    }
    f.area = shoelace_area<double>(f.poly);
    all.push_back(std::move(f));
  }
  // Per component, the unbounded face has the largest |area|.
  std::map<int, std::size_t> outer;
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto it = outer.find(all[i].component);
    if (it == outer.end() || std::abs(all[i].area) > std::abs(all[it->second].area)) outer[all[i].component] = i;
  }
  std::vector<Polyline<double>> loops;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (outer[all[i].component] == i) continue;
    loops.push_back(std::move(all[i].poly));
  }
  return loops;
}

}  // namespace

double Separatrix::max_radius() const {
  double r = 0;
  for (const auto& b : branches)
    for (const auto& q : b.points) r = std::max(r, q.norm());
  return r;
}

Separatrix separatrix_trace(const HamiltonianParams<double>& h, const Vector2d& saddle,
                            const TraceOptions& options) {
  const Stability st = stability_at(saddle, h);
  if (st == Stability::Degenerate) throw TracingFailure("degenerate Hessian at the trace start");
  if (st != Stability::Hyperbolic) throw TracingFailure("trace start is not a hyperbolic point");

  const FixedPointSet fps = fixed_points(h);
  double size = 0;
  for (const auto& f : fps.all()) size = std::max(size, f.position.norm());
  size = std::max(size, saddle.norm());
  if (!(size > 0)) throw TracingFailure("structure size is zero");

  Separatrix sep;
  sep.level = hamiltonian_value(saddle, h);
  const double h_scale = std::max({std::abs(sep.level), h.epsilon * size, std::abs(h.delta) * size * size});
  sep.saddles.push_back(saddle);
  for (const auto& f : fps.hyperbolic()) {
    if ((f.position - saddle).norm() < 1e-9 * size) continue;
    if (std::abs(f.energy - sep.level) < 1e-9 * h_scale) sep.saddles.push_back(f.position);
  }

  TraceOptions opt = options;
  if (opt.initial_step <= 0) opt.initial_step = 2e-3 * size;
  const Tracer tracer{h, sep.level, size, h_scale, opt};
  std::vector<SeparatrixBranch> raw;
  for (int k = 0; k < static_cast<int>(sep.saddles.size()); ++k) {
    const auto dirs = null_directions(hamiltonian_hessian(sep.saddles[k], h));
    for (const auto& d : dirs)
      for (double sign : {1.0, -1.0}) raw.push_back(tracer.march(sep.saddles, k, sign * d));
  }
  for (auto& b : raw) {
    bool dup = false;
    for (const auto& kept : sep.branches)
      if (same_branch(b, kept, 1e-2 * size)) {
        dup = true;
        break;
      }
    if (!dup) sep.branches.push_back(std::move(b));
  }
  sep.loops = faces(sep.branches, static_cast<int>(sep.saddles.size()));
  return sep;
}

double structure_extent(const HamiltonianParams<double>& h) {
  const FixedPointSet fps = fixed_points(h);
  double extent = 0;
  std::vector<double> levels;
  for (const auto& f : fps.hyperbolic()) {
    bool done = false;
    for (double l : levels)
      if (std::abs(l - f.energy) <= 1e-9 * std::max(std::abs(l), 1e-300)) done = true;
    if (done) continue;
    levels.push_back(f.energy);
    extent = std::max(extent, separatrix_trace(h, f.position).max_radius());
  }
  if (extent == 0)
    for (const auto& f : fps.elliptic()) extent = std::max(extent, 2 * f.position.norm());
  return extent;
}

}  // namespace dres
