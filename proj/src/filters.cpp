#include "attikit/filters.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace attikit::filters {

namespace {

Matrix3d skew(const Vector3d& v) {
  Matrix3d m;
  m << 0.0, -v[2], v[1],
       v[2], 0.0, -v[0],
       -v[1], v[0], 0.0;
  return m;
}

bool finite(const imu::ImuSample& s) {
  return std::isfinite(s.t) && s.gyro.allFinite() && s.accel.allFinite();
}

// Gravity direction in the body frame predicted by q: R^T e_z.
Vector3d predicted_up(const Quaterniond& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return Vector3d(2.0 * (x * z - w * y), 2.0 * (w * x + y * z), w * w - x * x - y * y + z * z);
}

// Body-frame rotation taking `from` onto `to` (both unit), as a rotation vector.
Vector3d shortest_arc(const Vector3d& from, const Vector3d& to) {
  const Vector3d c = from.cross(to);
  const double s = c.norm();
  const double angle = std::atan2(s, from.dot(to));
  if (s < 1e-15) return Vector3d::Zero();
  return c * (angle / s);
}

Quaterniond cf_correct(const FilterConfig& cfg, const Quaterniond& q, const Vector3d& a_unit, double dt) {
  // q_acc = q (x) delta has the measured gravity direction; blend toward it.
  const Vector3d delta = shortest_arc(a_unit, predicted_up(q));
  const double alpha = 1.0 - std::pow(1.0 - cfg.cf_alpha, dt * cfg.cf_reference_rate_hz);
  return hamilton_product(q, rotation_vector_to_quat<double>(alpha * delta)).normalized();
}

Quaterniond madgwick_correct(const FilterConfig& cfg, const Quaterniond& q, const Vector3d& a_unit, double dt) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  const Vector3d f = predicted_up(q) - a_unit;
  Eigen::Matrix<double, 3, 4> jac;
  jac << -2.0 * y, 2.0 * z, -2.0 * w, 2.0 * x,
         2.0 * x, 2.0 * w, 2.0 * z, 2.0 * y,
         0.0, -4.0 * x, -4.0 * y, 0.0;
  const Eigen::Vector4d grad = jac.transpose() * f;
  const double norm = grad.norm();
  if (norm < 1e-15) return q;
  // Normalized gradient step of length beta*dt, capped at |grad|/4, the
  // linearized distance to the gravity-aligned attitude.
  const double step = std::min(cfg.madgwick_beta * dt, norm / 4.0);
  return (q - step * grad / norm).normalized();
}

void ekf_predict(const FilterConfig& cfg, FilterState& s, const Vector3d& rate, double dt) {
  const Matrix3d f = rotation_matrix(rotation_vector_to_quat<double>(rate * dt)).transpose();
  const double qn = cfg.ekf_gyro_noise * dt;
  s.covariance = f * s.covariance * f.transpose() + (qn * qn) * Matrix3d::Identity();
}

void ekf_correct(const FilterConfig& cfg, FilterState& s, const Vector3d& a_unit) {
  const Vector3d h = predicted_up(s.q);
  const Matrix3d jac = skew(h);
  const double rn = cfg.ekf_accel_noise / cfg.gravity;
  const Matrix3d meas_cov = (rn * rn) * Matrix3d::Identity();
  const Matrix3d innov_cov = jac * s.covariance * jac.transpose() + meas_cov;
  const Matrix3d gain = s.covariance * jac.transpose() * innov_cov.inverse();
  const Vector3d dtheta = gain * (a_unit - h);
  s.q = hamilton_product(s.q, rotation_vector_to_quat(dtheta)).normalized();
  const Matrix3d i_kh = Matrix3d::Identity() - gain * jac;
  const Matrix3d p = i_kh * s.covariance * i_kh.transpose() + gain * meas_cov * gain.transpose();
  s.covariance = 0.5 * (p + p.transpose());
}

}  // namespace

std::string_view kind_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::CF: return "cf";
    case FilterKind::Madgwick: return "madgwick";
    case FilterKind::Mahony: return "mahony";
    case FilterKind::EKF: return "ekf";
  }
  return "?";
}

std::optional<FilterKind> parse_kind(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (FilterKind k : {FilterKind::CF, FilterKind::Madgwick, FilterKind::Mahony, FilterKind::EKF}) {
    if (kind_name(k) == lower) return k;
  }
  return std::nullopt;
}

FilterConfig FilterConfig::defaults(FilterKind kind) {
  FilterConfig c;
  c.kind = kind;
  return c;
}

void FilterConfig::set_gain(std::string_view key, double value) {
  if (key == "alpha") cf_alpha = value;
  else if (key == "beta") madgwick_beta = value;
  else if (key == "kp") mahony_kp = value;
  else if (key == "ki") mahony_ki = value;
  else if (key == "gyro_noise") ekf_gyro_noise = value;
  else if (key == "accel_noise") ekf_accel_noise = value;
  else if (key == "initial_cov") ekf_initial_cov = value;
  else if (key == "initial_yaw_cov") ekf_initial_yaw_cov = value;
  else if (key == "period") sample_period = value;
  else if (key == "gate") accel_gate = value != 0.0;
  else if (key == "accel") accel_correction = value != 0.0;
  else throw std::invalid_argument("unknown gain '" + std::string(key) + "'");
  validate();
}

void FilterConfig::validate() const {
  if (!(cf_alpha >= 0.0 && cf_alpha <= 1.0)) throw std::invalid_argument("cf alpha must lie in [0, 1]");
  if (!(cf_reference_rate_hz > 0.0)) throw std::invalid_argument("cf reference rate must be positive");
  if (!(madgwick_beta >= 0.0)) throw std::invalid_argument("madgwick beta must be >= 0");
  if (!(mahony_kp >= 0.0) || !(mahony_ki >= 0.0)) throw std::invalid_argument("mahony gains must be >= 0");
  if (!(ekf_gyro_noise > 0.0) || !(ekf_accel_noise > 0.0) || !(ekf_initial_cov > 0.0) ||
      !(ekf_initial_yaw_cov > 0.0)) {
    throw std::invalid_argument("ekf noise parameters must be positive");
  }
  if (!(sample_period > 0.0)) throw std::invalid_argument("sample period must be positive");
  if (!(gravity > 0.0) || !(gate_low < gate_high)) throw std::invalid_argument("invalid accel gate");
}

AccelInit init_from_accel(const Vector3d& accel, double gravity) {
  if (!accel.allFinite() || accel.norm() <= 0.5 * gravity) return {identity_quat(), true};
  EulerAnglesd e;
  e.roll = std::atan2(accel[1], accel[2]);
  e.pitch = std::atan2(-accel[0], std::hypot(accel[1], accel[2]));
  e.yaw = 0.0;
  return {euler_to_quat(e), false};
}

FilterState initialize(const FilterConfig& config, const imu::ImuSample& first) {
  config.validate();
  if (!finite(first)) throw poisoned_state("initialize: non-finite sample");
  FilterState s;
  if (config.initial_attitude) {
    require_unit(*config.initial_attitude, "initial_attitude");
    s.q = *config.initial_attitude;
  } else {
    const AccelInit init = init_from_accel(first.accel, config.gravity);
    s.q = init.q;
    s.init_warning = init.warning;
  }
  const Vector3d up = predicted_up(s.q);
  s.covariance = config.ekf_initial_cov * (Matrix3d::Identity() - up * up.transpose()) +
                 config.ekf_initial_yaw_cov * up * up.transpose();
  s.last_t = first.t;
  s.last_gyro = first.gyro;
  return s;
}

FilterState update(const FilterConfig& config, FilterState s, const imu::ImuSample& sample) {
  if (!finite(sample) || !s.q.allFinite()) throw poisoned_state("update: non-finite input");
  const double dt = config.use_timestamps ? sample.t - s.last_t : config.sample_period;
  if (!(dt > 0.0)) throw std::invalid_argument("update: non-positive time step");

  const double a_norm = sample.accel.norm();
  const bool use_accel = config.accel_correction && a_norm > 0.0 &&
                         (!config.accel_gate || (a_norm >= config.gate_low * config.gravity &&
                                                 a_norm <= config.gate_high * config.gravity));
  const Vector3d a_unit = a_norm > 0.0 ? Vector3d(sample.accel / a_norm) : Vector3d::Zero();

  switch (config.kind) {
    case FilterKind::CF:
      s.q = imu::propagate(s.q, s.last_gyro, sample.gyro, dt);
      if (use_accel) s.q = cf_correct(config, s.q, a_unit, dt);
      break;
    case FilterKind::Madgwick:
      s.q = imu::propagate(s.q, s.last_gyro, sample.gyro, dt);
      if (use_accel) s.q = madgwick_correct(config, s.q, a_unit, dt);
      break;
    case FilterKind::Mahony: {
      Vector3d feedback = Vector3d::Zero();
      if (use_accel) {
        const Vector3d err = a_unit.cross(predicted_up(s.q));
        if (config.mahony_ki > 0.0) s.integral += config.mahony_ki * err * dt;
        feedback = config.mahony_kp * err;
      }
      feedback += s.integral;
      s.q = imu::propagate(s.q, s.last_gyro + feedback, sample.gyro + feedback, dt);
      break;
    }
    case FilterKind::EKF: {
      const Vector3d mean_rate = 0.5 * (s.last_gyro + sample.gyro);
      s.q = imu::propagate(s.q, s.last_gyro, sample.gyro, dt);
      ekf_predict(config, s, mean_rate, dt);
      if (use_accel) ekf_correct(config, s, a_unit);
      break;
    }
  }
  if (!s.q.allFinite()) throw poisoned_state("update: state became non-finite");
  s.last_t = sample.t;
  s.last_gyro = sample.gyro;
  ++s.steps;
  return s;
}

std::vector<Quaterniond> run(const FilterConfig& config, std::span<const imu::ImuSample> trial) {
  if (trial.empty()) throw std::invalid_argument("run: empty trial");
  std::vector<Quaterniond> out;
  out.reserve(trial.size());
  FilterState s = initialize(config, trial.front());
  out.push_back(s.q);
  for (std::size_t k = 1; k < trial.size(); ++k) {
    try {
      s = update(config, std::move(s), trial[k]);
    } catch (const poisoned_state& e) {
      throw poisoned_state("sample " + std::to_string(k) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("sample " + std::to_string(k) + ": " + e.what());
    }
    out.push_back(s.q);
  }
  return out;
}

}  // namespace attikit::filters
