#pragma once

// Averaged Normal Form Hamiltonian of the map near the 1:4 resonance with a 1:1 exciter:
//
//   H(J, theta) = delta J + J^2 (Omega2/2 + A cos 4 theta) + (eps/2) sqrt(2J) cos(theta + psi0)
//
// evaluated in the Cartesian slow coordinates X = sqrt(2J) cos theta, Y = sqrt(2J) sin theta,
// where it is a polynomial:
//
//   H = delta r^2/2 + Omega2 r^4/8 + A (X^4 - 6 X^2 Y^2 + Y^4)/4 + (eps/2)(X cos psi0 - Y sin psi0)

#include "dres/common.hpp"
#include "dres/geometry.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

namespace dres {

template <typename Scalar = double>
struct NormalFormCoefficients {
  Scalar Omega2;
  Scalar A;
};

/// Omega2 = -1/8 - 3 kappa/8, A = (1 - kappa)/16 (O(delta) corrections dropped).
template <typename Scalar>
NormalFormCoefficients<Scalar> coefficients(Scalar kappa) {
  return {Scalar(-1) / 8 - Scalar(3) * kappa / 8, (Scalar(1) - kappa) / 16};
}

template <typename Scalar = double>
struct HamiltonianParams {
  Scalar delta = 0;
  Scalar epsilon = 0;
  Scalar kappa = 0;
  Scalar psi0 = 0;
  Scalar Omega2 = Scalar(-1) / 8;
  Scalar A = Scalar(1) / 16;

  static HamiltonianParams from_kappa(Scalar delta, Scalar epsilon, Scalar kappa, Scalar psi0 = 0) {
    const auto c = coefficients(kappa);
    return {delta, epsilon, kappa, psi0, c.Omega2, c.A};
  }
};

template <typename Scalar>
Scalar hamiltonian_value(Scalar X, Scalar Y, const HamiltonianParams<Scalar>& h) {
  using std::cos;
  using std::sin;
  const Scalar X2 = X * X, Y2 = Y * Y;
  const Scalar J = (X2 + Y2) / 2;
  return h.delta * J + h.Omega2 * J * J / 2 + h.A * (X2 * X2 - 6 * X2 * Y2 + Y2 * Y2) / 4 +
         h.epsilon / 2 * (X * cos(h.psi0) - Y * sin(h.psi0));
}

template <typename Scalar>
Scalar hamiltonian_value(const Vector2<Scalar>& q, const HamiltonianParams<Scalar>& h) {
  return hamiltonian_value(q.x(), q.y(), h);
}

template <typename Scalar>
Vector2<Scalar> hamiltonian_gradient(const Vector2<Scalar>& q, const HamiltonianParams<Scalar>& h) {
  using std::cos;
  using std::sin;
  const Scalar X = q.x(), Y = q.y();
  const Scalar J = (X * X + Y * Y) / 2;
  return {h.delta * X + h.Omega2 * J * X + h.A * (X * X * X - 3 * X * Y * Y) + h.epsilon / 2 * cos(h.psi0),
          h.delta * Y + h.Omega2 * J * Y + h.A * (Y * Y * Y - 3 * X * X * Y) - h.epsilon / 2 * sin(h.psi0)};
}

template <typename Scalar>
Matrix2<Scalar> hamiltonian_hessian(const Vector2<Scalar>& q, const HamiltonianParams<Scalar>& h) {
  const Scalar X = q.x(), Y = q.y();
  const Scalar J = (X * X + Y * Y) / 2;
  Matrix2<Scalar> m;
  m(0, 0) = h.delta + h.Omega2 * (J + X * X) + 3 * h.A * (X * X - Y * Y);
  m(1, 1) = h.delta + h.Omega2 * (J + Y * Y) + 3 * h.A * (Y * Y - X * X);
  m(0, 1) = m(1, 0) = (h.Omega2 - 6 * h.A) * X * Y;
  return m;
}

// ---------------------------------------------------------------------------------------
// Fixed points and topology

struct CriticalDeltas {
  double delta_hat_1;  ///< three real on-axis roots above this value
  double delta_hat_2;  ///< three real off-axis roots above this value
};

/// delta_hat_1 = (3/4) kappa^(1/3), delta_hat_2 = (3/4) [kappa^2 (kappa+1)/(kappa-1)^2]^(1/3).
CriticalDeltas critical_deltas(double kappa);

enum class Stability { Elliptic, Hyperbolic, Degenerate };
enum class Topology { SingleIsland, ThreeIslands, FullStructure };

std::string_view to_string(Stability s);
std::string_view to_string(Topology t);

struct FixedPoint {
  Vector2d position;
  Stability stability;
  double energy;
  double gradient_norm;
  double action() const { return position.squaredNorm() / 2; }
};

struct FixedPointSet {
  std::vector<FixedPoint> on_axis;   ///< (X, 0) family, up to three
  std::vector<FixedPoint> off_axis;  ///< (X, +-Y) family, mirror pairs
  Topology topology = Topology::SingleIsland;

  std::vector<FixedPoint> all() const;
  std::vector<FixedPoint> hyperbolic() const;
  std::vector<FixedPoint> elliptic() const;
};

/// Coefficients {c3, c1, c0} of c3 X^3 + c1 X + c0 = 0.
using CubicCoefficients = std::array<double, 3>;

/// On-axis stationarity dH/dX(X, 0) = 0 derived from the implemented Hamiltonian
/// (psi0 = 0): (Omega2/2 + A) X^3 + delta X + eps/2; with the kappa coefficients the
/// cubic term is -kappa/4.
CubicCoefficients on_axis_cubic(const HamiltonianParams<double>& h);
/// Off-axis stationarity after eliminating Y^2 (psi0 = 0).
CubicCoefficients off_axis_cubic(const HamiltonianParams<double>& h);
/// Y^2 on the off-axis branch for a given X; negative means no real point.
double off_axis_y_squared(double X, const HamiltonianParams<double>& h);
/// The on-axis cubic as printed in the reference derivation, with -kappa/3 on X^3.
CubicCoefficients printed_on_axis_cubic(const HamiltonianParams<double>& h);

/// Real roots of c3 X^3 + c1 X + c0 = 0 (closed form, ascending).
std::vector<double> real_cubic_roots(const CubicCoefficients& c);

Stability classify_stability(const Matrix2d& hessian, double degenerate_tol = 1e-12);

/// All stationary points of H with their stability. Requires 0 < kappa < 1.
/// psi0 = 0 uses the two cubics. Other phases use 2-D Newton on the gradient from the
/// rotated psi0 = 0 points and a polar grid of seeds; "on_axis" then means the line at
/// angle -psi0. The topology field always reports the psi0 = 0 class of delta_hat.
FixedPointSet fixed_points(const HamiltonianParams<double>& h);

Topology topology_for(double delta_hat, double kappa);

// ---------------------------------------------------------------------------------------
// Scaling J = J_hat eps^(2/3), delta = delta_hat eps^(2/3)

struct ScaledParams {
  double delta_hat;
  double kappa;
  double psi0;
};

ScaledParams scale_params(const HamiltonianParams<double>& h);
HamiltonianParams<double> unscale_params(const ScaledParams& s, double epsilon);
/// Scaled problem as a Hamiltonian with eps = 1.
HamiltonianParams<double> scaled_hamiltonian(const ScaledParams& s);
double scale_action(double J, double epsilon);
double unscale_action(double J_hat, double epsilon);
/// Coordinates scale as eps^(1/3).
double coordinate_scale(double epsilon);

// ---------------------------------------------------------------------------------------
// Separatrices

struct TraceOptions {
  double initial_step = 0;    ///< 0: 2e-3 of the structure size
  double max_turn_angle = 0.05;
  double closure_tol = 1e-6;  ///< relative to the structure size
  int max_steps = 200000;
};

struct SeparatrixBranch {
  Polyline<double> points;
  int from = 0;  ///< index into Separatrix::saddles
  int to = 0;
};

struct Separatrix {
  double level = 0;
  std::vector<Vector2d> saddles;           ///< hyperbolic points on this level
  std::vector<SeparatrixBranch> branches;  ///< unique saddle-to-saddle curves
  std::vector<Polyline<double>> loops;     ///< closed curves bounding single regions

  double max_radius() const;
};

/// Level set H = H(saddle) traced by predictor-corrector marching from every hyperbolic
/// point on that level, split into saddle-to-saddle branches and assembled into loops.
Separatrix separatrix_trace(const HamiltonianParams<double>& h, const Vector2d& saddle,
                            const TraceOptions& options = {});

/// Radius of the outermost separatrix (or twice the outermost elliptic point when the
/// phase space has no hyperbolic point).
double structure_extent(const HamiltonianParams<double>& h);

}  // namespace dres
