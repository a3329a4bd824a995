#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace patchsmith {

using Vec3 = Eigen::Vector3d;

struct BoundingBox {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  bool empty() const { return (max.array() < min.array()).any(); }
  double diagonal() const { return empty() ? 0.0 : (max - min).norm(); }
};

inline BoundingBox bounding_box(std::span<const Vec3> points) {
  BoundingBox box;
  for (const auto& p : points) box.extend(p);
  return box;
}

inline Vec3 midpoint(const Vec3& a, const Vec3& b) { return (a + b) * 0.5; }

/// Angle in [0, pi] between two vectors; 0 when either is zero.
inline double angle_between(const Vec3& a, const Vec3& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace patchsmith
