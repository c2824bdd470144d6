#pragma once

#include "attikit/quat.hpp"

#include <random>

namespace attikit::testing {

inline Quaterniond random_unit_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized();
}

inline Vector3d random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vector3d(n(rng), n(rng), n(rng)).normalized();
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Rotation about a unit axis, Rodrigues form.
inline Matrix3d rodrigues(const Vector3d& axis, double angle) {
  Matrix3d k;
  k << 0, -axis.z(), axis.y(),
       axis.z(), 0, -axis.x(),
       -axis.y(), axis.x(), 0;
  return Matrix3d::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

inline double rotation_distance(const Quaterniond& a, const Quaterniond& b) {
  return std::min((a - b).norm(), (a + b).norm());
}

}  // namespace attikit::testing
