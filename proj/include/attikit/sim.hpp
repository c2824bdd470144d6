#pragma once

// Synthetic trial generation from a JSON description.
//
// {
//   "name": "static_tilt",
//   "seed": 7,                                   (optional)
//   "trajectory": {"kind": "static|constant_rate|sinusoidal|composite",
//                  "duration": 10, "rate_hz": 100,
//                  "initial": [w, x, y, z] | "initial_euler_deg": [roll, pitch, yaw],
//                  "body_rate": [..], "axis": [..], "amplitude": rad, "frequency": Hz,
//                  "linear_accel_amplitude": [..], "linear_accel_frequency": Hz},
//   "noise": {"gyro_std": .., "accel_std": ..},
//   "bias": {"gyro": [..], "accel": [..], "gyro_random_walk": .., "accel_random_walk": ..}
// }

#include "attikit/dataset.hpp"
#include "attikit/imu.hpp"

#include <cstdint>
#include <string>

namespace attikit::sim {

struct SimulationSpec {
  std::string name{"synthetic"};
  imu::TrajectorySpec trajectory;
  imu::NoiseSpec noise;
  imu::BiasSpec bias;
};

/// Seed falls back to default_seed when the JSON has none.
SimulationSpec parse_spec(const std::string& json_text, std::uint64_t default_seed = 0);

/// Truth + measurement model, ground truth attached.
data::TrialFile simulate(const SimulationSpec& spec);

/// ATTIKIT_SEED when set and numeric, else 0.
std::uint64_t default_seed();

}  // namespace attikit::sim
