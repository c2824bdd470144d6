#pragma once

// Accelerometer + gyroscope attitude filters: complementary, Madgwick,
// Mahony and a multiplicative (error-state) EKF.
//
// All four share one gyro propagation step (imu::propagate), so with the
// accelerometer correction disabled or zero gains every filter reproduces
// imu::dead_reckon exactly. Roll and pitch are observable; yaw drifts.

#include "attikit/imu.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace attikit::filters {

enum class FilterKind { CF, Madgwick, Mahony, EKF };

std::string_view kind_name(FilterKind kind);
std::optional<FilterKind> parse_kind(std::string_view name);

struct FilterConfig {
  FilterKind kind{FilterKind::CF};

  // Complementary filter: accel weight per step at cf_reference_rate_hz,
  // rescaled as 1 - (1 - alpha)^(dt * rate) for other step sizes.
  double cf_alpha{0.02};
  double cf_reference_rate_hz{100.0};

  double madgwick_beta{0.1};

  double mahony_kp{1.0};
  double mahony_ki{0.0};

  // EKF noise: per-sample standard deviations.
  double ekf_gyro_noise{0.02};   // rad/s
  double ekf_accel_noise{0.3};   // m/s^2
  double ekf_initial_cov{1.0};   // rad^2, tilt
  // Heading is unobservable without a magnetometer and zero by convention at
  // start; a large variance here lets accel noise leak into yaw.
  double ekf_initial_yaw_cov{1e-6};  // rad^2, about the initial up axis

  // Start attitude; the accelerometer-derived attitude when unset.
  std::optional<Quaterniond> initial_attitude;

  double sample_period{0.01};  // s, used when use_timestamps is false
  bool use_timestamps{true};

  bool accel_correction{true};
  // Skip the accel correction when |a| leaves [gate_low, gate_high] * gravity.
  bool accel_gate{true};
  double gate_low{0.5};
  double gate_high{2.0};
  double gravity{imu::kStandardGravity};

  static FilterConfig defaults(FilterKind kind);

  /// Applies a `--gain key=value` override. Keys: alpha, beta, kp, ki,
  /// gyro_noise, accel_noise, initial_cov, initial_yaw_cov, period, gate (0/1), accel (0/1).
  void set_gain(std::string_view key, double value);

  /// Throws std::invalid_argument when a gain is out of range.
  void validate() const;
};

struct FilterState {
  Quaterniond q{identity_quat()};
  Vector3d integral{Vector3d::Zero()};  // Mahony integral feedback
  Matrix3d covariance{Matrix3d::Identity()};  // EKF, body-frame attitude error
  double last_t{0.0};
  Vector3d last_gyro{Vector3d::Zero()};
  std::size_t steps{0};
  bool init_warning{false};
};

/// NaN / inf reached the filter.
class poisoned_state : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AccelInit {
  Quaterniond q;
  bool warning;  // near free fall, identity returned
};

/// Leveling from a single accelerometer reading; yaw = 0.
AccelInit init_from_accel(const Vector3d& accel, double gravity = imu::kStandardGravity);

FilterState initialize(const FilterConfig& config, const imu::ImuSample& first);

FilterState update(const FilterConfig& config, FilterState state, const imu::ImuSample& sample);

/// init on the first sample, then one update per following sample.
std::vector<Quaterniond> run(const FilterConfig& config, std::span<const imu::ImuSample> trial);

}  // namespace attikit::filters
