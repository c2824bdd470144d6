#pragma once

// Synthetic trajectories, the IMU measurement model and gyro dead reckoning.
//
// Conventions:
//   q            body-to-world rotation, scalar first
//   gyro         body-frame angular rate, rad/s
//   accel        body-frame specific force, m/s^2
//   gravity      world vector g = [0, 0, +9.80665]
//
// Measurement model (per sample):
//   gyro_meas  = omega - b_gyro + v_gyro,        v_gyro  ~ N(0, sigma_gyro^2)
//   accel_meas = R^T g + a - b_accel + v_accel,  v_accel ~ N(0, sigma_accel^2)
// so a level, static, noise-free sensor reads [0, 0, +9.80665].

#include "attikit/quat.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace attikit::imu {

inline constexpr double kStandardGravity = 9.80665;

inline Vector3d standard_gravity() { return Vector3d(0.0, 0.0, kStandardGravity); }

struct ImuSample {
  double t{0.0};
  Vector3d gyro{Vector3d::Zero()};
  Vector3d accel{Vector3d::Zero()};
  std::optional<Quaterniond> gt;
};

struct NoiseSpec {
  double gyro_std{0.0};   // rad/s
  double accel_std{0.0};  // m/s^2
  std::uint64_t seed{0};
};

struct BiasSpec {
  Vector3d gyro{Vector3d::Zero()};   // rad/s
  Vector3d accel{Vector3d::Zero()};  // m/s^2
  double gyro_random_walk{0.0};      // rad/s per sqrt(s)
  double accel_random_walk{0.0};     // m/s^2 per sqrt(s)
};

enum class TrajectoryKind { Static, ConstantRate, Sinusoidal, Composite };

/// Closed-form trajectories. The general form is
///   q(t) = initial (x) exp(body_rate * t) (x) axis_angle(axis, amplitude * sin(2 pi f t))
/// with an optional sinusoidal world-frame linear acceleration. Static,
/// ConstantRate and Sinusoidal use only the parts their names imply.
struct TrajectorySpec {
  TrajectoryKind kind{TrajectoryKind::Static};
  double duration{1.0};  // s
  double rate_hz{100.0};
  Quaterniond initial{identity_quat()};
  Vector3d body_rate{Vector3d::Zero()};  // rad/s
  Vector3d axis{Vector3d::UnitX()};
  double amplitude{0.0};  // rad
  double frequency{0.0};  // Hz
  Vector3d linear_accel_amplitude{Vector3d::Zero()};  // m/s^2, world frame (composite only)
  double linear_accel_frequency{0.0};                 // Hz
};

struct TruthSample {
  double t;
  Quaterniond q;
  Vector3d omega;       // body frame
  Vector3d accel_body;  // linear acceleration, body frame
};

/// Samples at t_k = k / rate for k = 0 .. round(duration * rate), endpoint included.
std::vector<TruthSample> generate_trajectory(const TrajectorySpec& spec);

/// Seedable standard-normal source: mt19937_64 feeding Box-Muller.
/// The stream is fully specified here so fixtures regenerate bit-exactly
/// on any platform.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double next();

 private:
  double uniform_open();

  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Applies the measurement model to a truth stream. Draw order per sample:
/// 3 gyro noise, 3 accel noise, then 3 gyro and 3 accel random-walk steps
/// (the latter only when the corresponding random-walk std is nonzero).
std::vector<ImuSample> measure(std::span<const TruthSample> truth, const NoiseSpec& noise, const BiasSpec& bias,
                               const Vector3d& gravity = standard_gravity());

/// One integration step: q (x) exp(0.5 * (gyro_prev + gyro_cur) * dt), renormalized.
Quaterniond propagate(const Quaterniond& q, const Vector3d& gyro_prev, const Vector3d& gyro_cur, double dt);

/// Gyro-only attitude propagation, one output per input sample (first = q0).
std::vector<Quaterniond> dead_reckon(std::span<const ImuSample> samples, const Quaterniond& q0);

}  // namespace attikit::imu
