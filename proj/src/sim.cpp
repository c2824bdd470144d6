#include "attikit/sim.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <stdexcept>

namespace attikit::sim {

namespace {

using json = nlohmann::json;

Vector3d vec3(const json& j, const char* key, const Vector3d& fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 3) throw std::invalid_argument(std::string("simulation spec: '") + key + "' needs 3 values");
  return Vector3d(v[0], v[1], v[2]);
}

imu::TrajectoryKind trajectory_kind(const std::string& name) {
  if (name == "static") return imu::TrajectoryKind::Static;
  if (name == "constant_rate") return imu::TrajectoryKind::ConstantRate;
  if (name == "sinusoidal") return imu::TrajectoryKind::Sinusoidal;
  if (name == "composite") return imu::TrajectoryKind::Composite;
  throw std::invalid_argument("simulation spec: unknown trajectory kind '" + name + "'");
}

}  // namespace

std::uint64_t default_seed() {
  const char* env = std::getenv("ATTIKIT_SEED");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  return *end == '\0' ? static_cast<std::uint64_t>(v) : 0;
}

SimulationSpec parse_spec(const std::string& json_text, std::uint64_t default_seed) {
  SimulationSpec spec;
  try {
    const json j = json::parse(json_text);
    spec.name = j.value("name", spec.name);
    spec.noise.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : default_seed;

    const json t = j.value("trajectory", json::object());
    auto& tr = spec.trajectory;
    tr.kind = trajectory_kind(t.value("kind", "static"));
    tr.duration = t.value("duration", tr.duration);
    tr.rate_hz = t.value("rate_hz", tr.rate_hz);
    if (t.contains("initial")) {
      const auto q = t.at("initial").get<std::vector<double>>();
      if (q.size() != 4) throw std::invalid_argument("simulation spec: 'initial' needs 4 values");
      tr.initial = Quaterniond(q[0], q[1], q[2], q[3]).normalized();
    } else if (t.contains("initial_euler_deg")) {
      const Vector3d e = vec3(t, "initial_euler_deg", Vector3d::Zero());
      tr.initial = euler_to_quat(EulerAnglesd{deg2rad(e[0]), deg2rad(e[1]), deg2rad(e[2])});
    }
    tr.body_rate = vec3(t, "body_rate", tr.body_rate);
    tr.axis = vec3(t, "axis", tr.axis);
    tr.amplitude = t.value("amplitude", tr.amplitude);
    tr.frequency = t.value("frequency", tr.frequency);
    tr.linear_accel_amplitude = vec3(t, "linear_accel_amplitude", tr.linear_accel_amplitude);
    tr.linear_accel_frequency = t.value("linear_accel_frequency", tr.linear_accel_frequency);

    const json n = j.value("noise", json::object());
    spec.noise.gyro_std = n.value("gyro_std", 0.0);
    spec.noise.accel_std = n.value("accel_std", 0.0);

    const json b = j.value("bias", json::object());
    spec.bias.gyro = vec3(b, "gyro", Vector3d::Zero());
    spec.bias.accel = vec3(b, "accel", Vector3d::Zero());
    spec.bias.gyro_random_walk = b.value("gyro_random_walk", 0.0);
    spec.bias.accel_random_walk = b.value("accel_random_walk", 0.0);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("simulation spec: ") + e.what());
  }
  return spec;
}

data::TrialFile simulate(const SimulationSpec& spec) {
  const auto truth = imu::generate_trajectory(spec.trajectory);
  data::TrialFile trial;
  trial.meta.name = spec.name;
  trial.meta.rate_hz = spec.trajectory.rate_hz;
  trial.meta.source = "synthetic";
  trial.samples = imu::measure(truth, spec.noise, spec.bias);
  trial.has_ground_truth = true;
  trial.duplicates = data::find_duplicates(trial.samples);
  return trial;
}

}  // namespace attikit::sim
