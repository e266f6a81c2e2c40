#pragma once

#include "dres/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace dres {

template <typename Scalar>
using Polyline = std::vector<Vector2<Scalar>>;

/// Signed area of a closed polygon (last vertex joins the first).
template <typename Scalar>
Scalar shoelace_area(std::span<const Vector2<Scalar>> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return Scalar(0);
  Scalar twice = 0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++)
    twice += polygon[j].x() * polygon[i].y() - polygon[i].x() * polygon[j].y();
  return twice / 2;
}

/// Even-odd rule.
template <typename Scalar>
bool point_in_polygon(const Vector2<Scalar>& q, std::span<const Vector2<Scalar>> polygon) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = polygon[i];
    const auto& b = polygon[j];
    if ((a.y() > q.y()) != (b.y() > q.y())) {
      const Scalar xc = a.x() + (q.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (q.x() < xc) inside = !inside;
    }
  }
  return inside;
}

template <typename Scalar>
Scalar distance_to_segment(const Vector2<Scalar>& q, const Vector2<Scalar>& a, const Vector2<Scalar>& b) {
  const Vector2<Scalar> ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  Scalar t = len2 > 0 ? (q - a).dot(ab) / len2 : Scalar(0);
  t = std::clamp(t, Scalar(0), Scalar(1));
  return (a + t * ab - q).norm();
}

template <typename Scalar>
Scalar distance_to_polyline(const Vector2<Scalar>& q, std::span<const Vector2<Scalar>> line) {
  if (line.empty()) return std::numeric_limits<Scalar>::infinity();
  if (line.size() == 1) return (line.front() - q).norm();
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 1; i < line.size(); ++i)
    best = std::min(best, distance_to_segment(q, line[i - 1], line[i]));
  return best;
}

/// Symmetric Hausdorff distance between two polylines (vertex-to-polyline).
template <typename Scalar>
Scalar hausdorff_distance(std::span<const Vector2<Scalar>> a, std::span<const Vector2<Scalar>> b) {
  Scalar d = 0;
  for (const auto& q : a) d = std::max(d, distance_to_polyline(q, b));
  for (const auto& q : b) d = std::max(d, distance_to_polyline(q, a));
  return d;
}

}  // namespace dres
