#pragma once

// Normalized trial files and sliding-window extraction.
//
// CSV schema (header row required, exact column order):
//   t,gx,gy,gz,ax,ay,az[,qw,qx,qy,qz]
// units s, rad/s, m/s^2. Values are written with 17 significant digits so a
// save/load round trip is value-identical. Metadata lives in a sidecar JSON
// next to the CSV (trial.csv -> trial.json):
//   {"name": ..., "rate_hz": ..., "source": ...}
// with an optional "accel_sign" (+1 or -1) for datasets that report the
// negated specific force.
//
// Row numbers in error messages count data rows from 1 (header excluded).

#include "attikit/imu.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace attikit::data {

class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrialMeta {
  std::string name;
  double rate_hz{0.0};
  std::string source;
  double accel_sign{1.0};
};

struct DuplicateReport {
  std::size_t duplicate_samples{0};  // samples identical to their predecessor
  std::size_t runs{0};               // maximal runs of such samples
  double fraction{0.0};
};

struct TrialFile {
  TrialMeta meta;
  std::vector<imu::ImuSample> samples;
  bool has_ground_truth{false};
  DuplicateReport duplicates;
};

struct LoadOptions {
  bool drop_duplicates{false};
};

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

TrialMeta load_meta(const std::filesystem::path& meta_path);
void save_meta(const TrialMeta& meta, const std::filesystem::path& meta_path);

/// Parses the CSV body. Ground truth is renormalized; a ground-truth norm
/// further than 1e-3 from 1 is a schema error.
TrialFile parse_trial_csv(std::istream& in, const TrialMeta& meta, const LoadOptions& options = {});

/// Loads csv + sidecar (default: sidecar_path(csv_path)).
TrialFile load_trial(const std::filesystem::path& csv_path,
                     const std::optional<std::filesystem::path>& meta_path = std::nullopt,
                     const LoadOptions& options = {});

void write_trial_csv(const TrialFile& trial, std::ostream& out);
void save_trial(const TrialFile& trial, const std::filesystem::path& csv_path,
                const std::optional<std::filesystem::path>& meta_path = std::nullopt);

DuplicateReport find_duplicates(const std::vector<imu::ImuSample>& samples);

struct WindowSpec {
  int length{200};  // N, even
  int stride{10};   // S, 1 <= S <= N

  void validate() const;
};

struct Window {
  Eigen::Matrix<double, 6, Eigen::Dynamic> data;  // rows gx gy gz ax ay az
  std::size_t start{0};
  std::size_t center{0};  // start + N/2, the estimate timestamp
  double t_center{0.0};
  double rate_hz{0.0};
  std::optional<Quaterniond> target;
};

/// Windows start at k*S for k = 0 .. floor((len - N) / S). Edges are skipped, not padded.
std::vector<Window> extract_windows(const TrialFile& trial, const WindowSpec& spec);

/// Linear interpolation of gyro/accel, shortest-arc slerp of ground truth.
/// Resampling to the trial's own rate returns an exact copy.
TrialFile resample(const TrialFile& trial, double target_rate_hz);

struct ManifestEntry {
  std::filesystem::path path;
  std::filesystem::path meta_path;
};

/// {"trials": [{"path": ..., "meta_path": ...}]}; relative paths resolve
/// against the manifest's directory, meta_path defaults to the sidecar.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& manifest_path);

}  // namespace attikit::data
