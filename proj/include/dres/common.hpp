#pragma once

#include <Eigen/Core>

#include <numbers>
#include <stdexcept>
#include <string>

namespace dres {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

using Vector2d = Vector2<double>;
using Matrix2d = Matrix2<double>;

template <typename Scalar>
inline constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
template <typename Scalar>
inline constexpr Scalar kTwoPi = Scalar(2) * std::numbers::pi_v<Scalar>;

// Error hierarchy. NumericalError covers everything the CLI maps to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : NumericalError {
  using NumericalError::NumericalError;
};
struct TopologyUnsupported : NumericalError {
  using NumericalError::NumericalError;
};
struct UnsupportedResonance : NumericalError {
  using NumericalError::NumericalError;
};
struct UndefinedAngle : NumericalError {
  using NumericalError::NumericalError;
};
struct TracingFailure : NumericalError {
  using NumericalError::NumericalError;
};
struct ResolutionError : NumericalError {
  using NumericalError::NumericalError;
};
struct StraddleError : NumericalError {
  using NumericalError::NumericalError;
};
struct UndefinedCrossing : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace dres
