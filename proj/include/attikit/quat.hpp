#pragma once

// Quaternion algebra and attitude-error calculus.
//
// Quaternions are plain Eigen 4-vectors in scalar-first order [w, x, y, z].
// A unit quaternion q represents the body-to-world rotation
//   q = [cos(a/2), sin(a/2) * u].
// All functions are pure and templated on the scalar type.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <string>

namespace attikit {

template <typename Scalar>
using Quaternion = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;

using Quaterniond = Quaternion<double>;
using Vector3d = Vector3<double>;
using Matrix3d = Matrix3<double>;

/// Tolerance on | |q| - 1 | used by operations that require unit input.
inline constexpr double kUnitTolerance = 1e-6;

template <typename Scalar>
struct EulerAngles {
  Scalar roll{0};   // (-pi, pi]
  Scalar pitch{0};  // [-pi/2, pi/2]
  Scalar yaw{0};    // (-pi, pi]
};
using EulerAnglesd = EulerAngles<double>;

template <typename Scalar>
struct AttitudeError {
  Quaternion<Scalar> q_err;
  Scalar angle{0};        // total rotation angle, [0, pi]
  Scalar heading{0};      // rotation about z, (-pi, pi]
  Scalar inclination{0};  // residual tilt, [0, pi]
};

template <typename Scalar>
Quaternion<Scalar> make_quat(Scalar w, Scalar x, Scalar y, Scalar z) {
  return Quaternion<Scalar>(w, x, y, z);
}

template <typename Scalar = double>
Quaternion<Scalar> identity_quat() {
  return Quaternion<Scalar>(1, 0, 0, 0);
}

template <typename Scalar>
bool is_unit(const Quaternion<Scalar>& q, double tol = kUnitTolerance) {
  using std::abs;
  return abs(static_cast<double>(q.norm()) - 1.0) <= tol;
}

template <typename Scalar>
void require_unit(const Quaternion<Scalar>& q, const char* what) {
  if (!is_unit(q)) {
    throw std::invalid_argument(std::string(what) + ": quaternion is not unit norm");
  }
}

/// Hamilton product q (x) p.
template <typename Scalar>
Quaternion<Scalar> hamilton_product(const Quaternion<Scalar>& q, const Quaternion<Scalar>& p) {
  return Quaternion<Scalar>(q[0] * p[0] - q[1] * p[1] - q[2] * p[2] - q[3] * p[3],
                            q[0] * p[1] + q[1] * p[0] + q[2] * p[3] - q[3] * p[2],
                            q[0] * p[2] - q[1] * p[3] + q[2] * p[0] + q[3] * p[1],
                            q[0] * p[3] + q[1] * p[2] - q[2] * p[1] + q[3] * p[0]);
}

/// Matrix L(q) with hamilton_product(q, p) == L(q) * p.
template <typename Scalar>
Matrix4<Scalar> left_product_matrix(const Quaternion<Scalar>& q) {
  Matrix4<Scalar> m;
  m << q[0], -q[1], -q[2], -q[3],
       q[1],  q[0], -q[3],  q[2],
       q[2],  q[3],  q[0], -q[1],
       q[3], -q[2],  q[1],  q[0];
  return m;
}

template <typename Scalar>
Quaternion<Scalar> conjugate(const Quaternion<Scalar>& q) {
  return Quaternion<Scalar>(q[0], -q[1], -q[2], -q[3]);
}

/// Sign-canonical form: w >= 0, and if w == 0 the first nonzero component is positive.
/// Never applied implicitly by any other function.
template <typename Scalar>
Quaternion<Scalar> canonicalize(const Quaternion<Scalar>& q) {
  for (int i = 0; i < 4; ++i) {
    if (q[i] > Scalar(0)) return q;
    if (q[i] < Scalar(0)) return -q;
  }
  return q;
}

template <typename Scalar>
Quaternion<Scalar> axis_angle_to_quat(const std::type_identity_t<Vector3<Scalar>>& axis, Scalar angle) {
  using std::abs;
  using std::cos;
  using std::sin;
  if (abs(static_cast<double>(axis.norm()) - 1.0) > kUnitTolerance) {
    throw std::invalid_argument("axis_angle_to_quat: axis is not unit length");
  }
  const Scalar s = sin(angle / Scalar(2));
  return Quaternion<Scalar>(cos(angle / Scalar(2)), s * axis[0], s * axis[1], s * axis[2]);
}

/// Exponential map of a rotation vector (axis * angle) to a unit quaternion.
template <typename Scalar>
Quaternion<Scalar> rotation_vector_to_quat(const Vector3<Scalar>& v) {
  using std::cos;
  using std::sin;
  const Scalar angle = v.norm();
  if (angle < Scalar(1e-12)) {
    Quaternion<Scalar> q(Scalar(1), v[0] / Scalar(2), v[1] / Scalar(2), v[2] / Scalar(2));
    return q.normalized();
  }
  const Scalar k = sin(angle / Scalar(2)) / angle;
  return Quaternion<Scalar>(cos(angle / Scalar(2)), k * v[0], k * v[1], k * v[2]);
}

/// Inverse of rotation_vector_to_quat on the short arc.
template <typename Scalar>
Vector3<Scalar> quat_to_rotation_vector(const Quaternion<Scalar>& q_in) {
  using std::atan2;
  const Quaternion<Scalar> q = q_in[0] < Scalar(0) ? Quaternion<Scalar>(-q_in) : q_in;
  const Vector3<Scalar> v = q.template tail<3>();
  const Scalar s = v.norm();
  if (s < Scalar(1e-12)) return Scalar(2) * v;
  return (Scalar(2) * atan2(s, q[0]) / s) * v;
}

/// Body-to-world rotation matrix of a unit quaternion.
template <typename Scalar>
Matrix3<Scalar> rotation_matrix(const Quaternion<Scalar>& q) {
  const Scalar w = q[0], x = q[1], y = q[2], z = q[3];
  Matrix3<Scalar> r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

/// Rotates v from body to world frame: q (x) [0, v] (x) q*.
template <typename Scalar>
Vector3<Scalar> rotate(const Quaternion<Scalar>& q, const Vector3<Scalar>& v) {
  const Quaternion<Scalar> p(Scalar(0), v[0], v[1], v[2]);
  return hamilton_product(hamilton_product(q, p), conjugate(q)).template tail<3>();
}

/// ZYX (yaw-pitch-roll) Euler angles to quaternion.
template <typename Scalar>
Quaternion<Scalar> euler_to_quat(const EulerAngles<Scalar>& e) {
  using std::cos;
  using std::sin;
  const Scalar cr = cos(e.roll / 2), sr = sin(e.roll / 2);
  const Scalar cp = cos(e.pitch / 2), sp = sin(e.pitch / 2);
  const Scalar cy = cos(e.yaw / 2), sy = sin(e.yaw / 2);
  return Quaternion<Scalar>(cr * cp * cy + sr * sp * sy,
                            sr * cp * cy - cr * sp * sy,
                            cr * sp * cy + sr * cp * sy,
                            cr * cp * sy - sr * sp * cy);
}

/// Standard ZYX inverse. Within 1e-6 rad of gimbal lock roll is set to 0 and
/// yaw carries the whole free angle.
template <typename Scalar>
EulerAngles<Scalar> quat_to_euler(const Quaternion<Scalar>& q) {
  using std::asin;
  using std::atan2;
  using std::clamp;
  require_unit(q, "quat_to_euler");
  const Scalar w = q[0], x = q[1], y = q[2], z = q[3];
  const Scalar half_pi = std::numbers::pi_v<Scalar> / 2;
  const Scalar sin_pitch = clamp(Scalar(2) * (w * y - z * x), Scalar(-1), Scalar(1));
  EulerAngles<Scalar> e;
  e.pitch = asin(sin_pitch);
  if (half_pi - std::abs(e.pitch) < Scalar(1e-6)) {
    // Only yaw -/+ roll is defined here; fold it into yaw.
    e.roll = 0;
    e.yaw = sin_pitch > 0 ? Scalar(-2) * atan2(x, w) : Scalar(2) * atan2(x, w);
    e.pitch = sin_pitch > 0 ? half_pi : -half_pi;
  } else {
    e.roll = atan2(Scalar(2) * (w * x + y * z), Scalar(1) - Scalar(2) * (x * x + y * y));
    e.yaw = atan2(Scalar(2) * (w * z + x * y), Scalar(1) - Scalar(2) * (y * y + z * z));
  }
  const Scalar pi = std::numbers::pi_v<Scalar>;
  auto wrap = [pi](Scalar a) {
    while (a > pi) a -= 2 * pi;
    while (a <= -pi) a += 2 * pi;
    return a;
  };
  e.roll = wrap(e.roll);
  e.yaw = wrap(e.yaw);
  return e;
}

/// Multiplicative error q_true (x) q_est^-1.
template <typename Scalar>
Quaternion<Scalar> error_quat(const Quaternion<Scalar>& q_true, const Quaternion<Scalar>& q_est) {
  require_unit(q_true, "error_quat");
  require_unit(q_est, "error_quat");
  return hamilton_product(q_true, conjugate(q_est));
}

/// Total rotation angle of a unit error quaternion, in [0, pi]. Sign-safe.
template <typename Scalar>
Scalar quat_angle(const Quaternion<Scalar>& q_err) {
  using std::abs;
  using std::acos;
  using std::clamp;
  return Scalar(2) * acos(clamp(abs(q_err[0]), Scalar(0), Scalar(1)));
}

template <typename Scalar>
Scalar error_angle(const Quaternion<Scalar>& q_true, const Quaternion<Scalar>& q_est) {
  return quat_angle(error_quat(q_true, q_est));
}

/// Heading (about z) and inclination (residual tilt) parts of an error quaternion.
/// When q_w = q_z = 0 the heading is 0 and the inclination pi.
template <typename Scalar>
std::pair<Scalar, Scalar> heading_inclination_errors(const Quaternion<Scalar>& q_err) {
  using std::acos;
  using std::atan2;
  using std::clamp;
  using std::sqrt;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  Scalar heading = Scalar(2) * atan2(q_err[3], q_err[0]);
  if (heading > pi) heading -= 2 * pi;
  if (heading <= -pi) heading += 2 * pi;
  const Scalar r = sqrt(q_err[0] * q_err[0] + q_err[3] * q_err[3]);
  const Scalar inclination = Scalar(2) * acos(clamp(r, Scalar(0), Scalar(1)));
  return {heading, inclination};
}

template <typename Scalar>
AttitudeError<Scalar> attitude_error(const Quaternion<Scalar>& q_true, const Quaternion<Scalar>& q_est) {
  AttitudeError<Scalar> out;
  out.q_err = error_quat(q_true, q_est);
  out.angle = quat_angle(out.q_err);
  std::tie(out.heading, out.inclination) = heading_inclination_errors(out.q_err);
  return out;
}

template <typename Scalar>
Scalar rmse_angle(std::span<const Scalar> errors) {
  using std::sqrt;
  if (errors.empty()) throw std::invalid_argument("rmse_angle: empty sequence");
  Scalar sum = 0;
  for (Scalar e : errors) sum += e * e;
  return sqrt(sum / static_cast<Scalar>(errors.size()));
}

/// Shortest-arc spherical interpolation, renormalized.
template <typename Scalar>
Quaternion<Scalar> slerp(const Quaternion<Scalar>& a, Quaternion<Scalar> b, Scalar t) {
  using std::acos;
  using std::sin;
  Scalar d = a.dot(b);
  if (d < 0) {
    b = -b;
    d = -d;
  }
  if (d > Scalar(0.9995)) {
    return (a + t * (b - a)).normalized();
  }
  const Scalar theta = acos(d);
  const Scalar s = sin(theta);
  return ((sin((1 - t) * theta) / s) * a + (sin(t * theta) / s) * b).normalized();
}

template <typename Scalar>
constexpr Scalar deg2rad(Scalar d) {
  return d * std::numbers::pi_v<Scalar> / Scalar(180);
}
template <typename Scalar>
constexpr Scalar rad2deg(Scalar r) {
  return r * Scalar(180) / std::numbers::pi_v<Scalar>;
}

}  // namespace attikit
