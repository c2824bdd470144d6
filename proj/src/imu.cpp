#include "attikit/imu.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace attikit::imu {

std::vector<TruthSample> generate_trajectory(const TrajectorySpec& spec) {
  if (!(spec.duration > 0.0) || !(spec.rate_hz > 0.0)) {
    throw std::invalid_argument("generate_trajectory: duration and rate must be positive");
  }
  require_unit(spec.initial, "generate_trajectory");

  Vector3d rate = Vector3d::Zero();
  double amplitude = 0.0;
  double frequency = 0.0;
  Vector3d lin_amp = Vector3d::Zero();
  switch (spec.kind) {
    case TrajectoryKind::Static:
      break;
    case TrajectoryKind::ConstantRate:
      rate = spec.body_rate;
      break;
    case TrajectoryKind::Sinusoidal:
      amplitude = spec.amplitude;
      frequency = spec.frequency;
      break;
    case TrajectoryKind::Composite:
      rate = spec.body_rate;
      amplitude = spec.amplitude;
      frequency = spec.frequency;
      lin_amp = spec.linear_accel_amplitude;
      break;
    default:
      throw std::invalid_argument("generate_trajectory: unsupported trajectory kind");
  }
  const bool oscillates = amplitude != 0.0 && frequency != 0.0;
  if (oscillates && std::abs(spec.axis.norm() - 1.0) > kUnitTolerance) {
    throw std::invalid_argument("generate_trajectory: oscillation axis is not unit length");
  }

  const auto n = static_cast<std::size_t>(std::llround(spec.duration * spec.rate_hz)) + 1;
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<TruthSample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / spec.rate_hz;
    const Quaterniond spin = rotation_vector_to_quat<double>(rate * t);
    Quaterniond swing = identity_quat();
    Vector3d swing_rate = Vector3d::Zero();
    if (oscillates) {
      const double phase = two_pi * frequency * t;
      swing = axis_angle_to_quat(spec.axis, amplitude * std::sin(phase));
      swing_rate = spec.axis * (amplitude * two_pi * frequency * std::cos(phase));
    }
    TruthSample s;
    s.t = t;
    s.q = hamilton_product(hamilton_product(spec.initial, spin), swing).normalized();
    // Body rate of A(t) (x) B(t): R(B)^T omega_A + omega_B.
    s.omega = rotation_matrix(swing).transpose() * rate + swing_rate;
    Vector3d a_world = Vector3d::Zero();
    if (spec.linear_accel_frequency != 0.0) {
      a_world = lin_amp * std::sin(two_pi * spec.linear_accel_frequency * t);
    } else {
      a_world = lin_amp;
    }
    s.accel_body = rotation_matrix(s.q).transpose() * a_world;
    out.push_back(s);
  }
  return out;
}

double GaussianSource::uniform_open() {
  // 53-bit mantissa in (0, 1).
  double u = 0.0;
  do {
    u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  } while (u <= 0.0);
  return u;
}

double GaussianSource::next() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::vector<ImuSample> measure(std::span<const TruthSample> truth, const NoiseSpec& noise, const BiasSpec& bias,
                               const Vector3d& gravity) {
  if (noise.gyro_std < 0.0 || noise.accel_std < 0.0 || bias.gyro_random_walk < 0.0 ||
      bias.accel_random_walk < 0.0) {
    throw std::invalid_argument("measure: standard deviations must be non-negative");
  }
  GaussianSource rng(noise.seed);
  auto draw3 = [&rng] {
    Vector3d v;
    for (int i = 0; i < 3; ++i) v[i] = rng.next();
    return v;
  };

  Vector3d b_gyro = bias.gyro;
  Vector3d b_accel = bias.accel;
  std::vector<ImuSample> out;
  out.reserve(truth.size());
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const TruthSample& s = truth[k];
    const Vector3d v_gyro = noise.gyro_std * draw3();
    const Vector3d v_accel = noise.accel_std * draw3();

    ImuSample m;
    m.t = s.t;
    m.gyro = s.omega - b_gyro + v_gyro;
    m.accel = rotation_matrix(s.q).transpose() * gravity + s.accel_body - b_accel + v_accel;
    m.gt = s.q;
    out.push_back(m);

    if (k + 1 < truth.size()) {
      const double dt = truth[k + 1].t - s.t;
      if (bias.gyro_random_walk > 0.0) b_gyro += bias.gyro_random_walk * std::sqrt(dt) * draw3();
      if (bias.accel_random_walk > 0.0) b_accel += bias.accel_random_walk * std::sqrt(dt) * draw3();
    }
  }
  return out;
}

Quaterniond propagate(const Quaterniond& q, const Vector3d& gyro_prev, const Vector3d& gyro_cur, double dt) {
  const Vector3d rotvec = 0.5 * (gyro_prev + gyro_cur) * dt;
  return hamilton_product(q, rotation_vector_to_quat(rotvec)).normalized();
}

std::vector<Quaterniond> dead_reckon(std::span<const ImuSample> samples, const Quaterniond& q0) {
  if (samples.empty()) throw std::invalid_argument("dead_reckon: no samples");
  std::vector<Quaterniond> out;
  out.reserve(samples.size());
  Quaterniond q = q0.normalized();
  out.push_back(q);
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const double dt = samples[k].t - samples[k - 1].t;
    if (!(dt > 0.0)) {
      throw std::invalid_argument("dead_reckon: non-increasing timestamp at sample " + std::to_string(k));
    }
    q = propagate(q, samples[k - 1].gyro, samples[k].gyro, dt);
    out.push_back(q);
  }
  return out;
}

}  // namespace attikit::imu
