#include "attikit/dataset.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

namespace attikit::data {

namespace {

using json = nlohmann::json;

constexpr std::string_view kHeader = "t,gx,gy,gz,ax,ay,az";
constexpr std::string_view kHeaderGt = "t,gx,gy,gz,ax,ay,az,qw,qx,qy,qz";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

[[noreturn]] void row_error(std::size_t row, const std::string& what) {
  throw data_error("row " + std::to_string(row) + ": " + what);
}

double parse_field(std::string_view field, std::size_t row) {
  field = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    row_error(row, "cannot parse '" + std::string(field) + "'");
  }
  if (!std::isfinite(v)) row_error(row, "non-finite value");
  return v;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool same_measurement(const imu::ImuSample& a, const imu::ImuSample& b) {
  return a.gyro == b.gyro && a.accel == b.accel;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
  return p.is_absolute() ? p : base / p;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  return p.replace_extension(".json");
}

TrialMeta load_meta(const std::filesystem::path& meta_path) {
  std::ifstream in(meta_path);
  if (!in) throw data_error("cannot open metadata " + meta_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw data_error("metadata " + meta_path.string() + ": " + e.what());
  }
  TrialMeta meta;
  if (!j.contains("rate_hz") || !j["rate_hz"].is_number()) {
    throw data_error("metadata " + meta_path.string() + ": missing numeric rate_hz");
  }
  meta.rate_hz = j["rate_hz"].get<double>();
  if (!(meta.rate_hz > 0.0)) throw data_error("metadata: rate_hz must be positive");
  meta.name = j.value("name", meta_path.stem().string());
  meta.source = j.value("source", "");
  meta.accel_sign = j.value("accel_sign", 1.0);
  if (meta.accel_sign != 1.0 && meta.accel_sign != -1.0) throw data_error("metadata: accel_sign must be +1 or -1");
  return meta;
}

void save_meta(const TrialMeta& meta, const std::filesystem::path& meta_path) {
  json j;
  j["name"] = meta.name;
  j["rate_hz"] = meta.rate_hz;
  j["source"] = meta.source;
  if (meta.accel_sign != 1.0) j["accel_sign"] = meta.accel_sign;
  std::ofstream out(meta_path);
  if (!out) throw data_error("cannot write metadata " + meta_path.string());
  out << j.dump(2) << '\n';
}

DuplicateReport find_duplicates(const std::vector<imu::ImuSample>& samples) {
  DuplicateReport r;
  bool in_run = false;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const bool dup = same_measurement(samples[k], samples[k - 1]);
    if (dup) {
      ++r.duplicate_samples;
      if (!in_run) ++r.runs;
    }
    in_run = dup;
  }
  r.fraction = samples.empty() ? 0.0 : static_cast<double>(r.duplicate_samples) / static_cast<double>(samples.size());
  return r;
}

TrialFile parse_trial_csv(std::istream& in, const TrialMeta& meta, const LoadOptions& options) {
  if (!(meta.rate_hz > 0.0)) throw data_error("declared rate must be positive");
  TrialFile trial;
  trial.meta = meta;

  std::string line;
  if (!std::getline(in, line)) throw data_error("missing header row");
  const std::string_view header = trim(line);
  if (header == kHeaderGt) {
    trial.has_ground_truth = true;
  } else if (header != kHeader) {
    throw data_error("header must be '" + std::string(kHeader) + "[,qw,qx,qy,qz]', got '" + std::string(header) + "'");
  }
  const std::size_t columns = trial.has_ground_truth ? 11 : 7;

  std::size_t row = 0;
  double values[11];
  while (std::getline(in, line)) {
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    ++row;
    std::size_t col = 0;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view field = rest.substr(0, comma);
      if (col >= columns) row_error(row, "expected " + std::to_string(columns) + " columns");
      values[col++] = parse_field(field, row);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (col != columns) row_error(row, "expected " + std::to_string(columns) + " columns, got " + std::to_string(col));

    imu::ImuSample s;
    s.t = values[0];
    s.gyro = Vector3d(values[1], values[2], values[3]);
    s.accel = meta.accel_sign * Vector3d(values[4], values[5], values[6]);
    if (trial.has_ground_truth) {
      Quaterniond q(values[7], values[8], values[9], values[10]);
      if (std::abs(q.norm() - 1.0) > 1e-3) row_error(row, "ground-truth quaternion is not unit norm");
      s.gt = q.normalized();
    }
    if (!trial.samples.empty() && !(s.t > trial.samples.back().t)) row_error(row, "timestamps must strictly increase");
    trial.samples.push_back(s);
  }

  trial.duplicates = find_duplicates(trial.samples);
  if (options.drop_duplicates && trial.duplicates.duplicate_samples > 0) {
    std::vector<imu::ImuSample> kept;
    kept.reserve(trial.samples.size());
    for (const auto& s : trial.samples) {
      if (kept.empty() || !same_measurement(s, kept.back())) kept.push_back(s);
    }
    trial.samples = std::move(kept);
  }
  return trial;
}

TrialFile load_trial(const std::filesystem::path& csv_path, const std::optional<std::filesystem::path>& meta_path,
                     const LoadOptions& options) {
  const TrialMeta meta = load_meta(meta_path.value_or(sidecar_path(csv_path)));
  std::ifstream in(csv_path);
  if (!in) throw data_error("cannot open " + csv_path.string());
  try {
    return parse_trial_csv(in, meta, options);
  } catch (const data_error& e) {
    throw data_error(csv_path.string() + ": " + e.what());
  }
}

void write_trial_csv(const TrialFile& trial, std::ostream& out) {
  out << (trial.has_ground_truth ? kHeaderGt : kHeader) << '\n';
  for (const auto& s : trial.samples) {
    const Vector3d accel = trial.meta.accel_sign * s.accel;
    out << fmt17(s.t);
    for (int i = 0; i < 3; ++i) out << ',' << fmt17(s.gyro[i]);
    for (int i = 0; i < 3; ++i) out << ',' << fmt17(accel[i]);
    if (trial.has_ground_truth) {
      const Quaterniond q = s.gt.value_or(identity_quat());
      for (int i = 0; i < 4; ++i) out << ',' << fmt17(q[i]);
    }
    out << '\n';
  }
}

void save_trial(const TrialFile& trial, const std::filesystem::path& csv_path,
                const std::optional<std::filesystem::path>& meta_path) {
  std::ofstream out(csv_path);
  if (!out) throw data_error("cannot write " + csv_path.string());
  write_trial_csv(trial, out);
  save_meta(trial.meta, meta_path.value_or(sidecar_path(csv_path)));
}

void WindowSpec::validate() const {
  if (length < 2 || length % 2 != 0) throw std::invalid_argument("window length must be even and >= 2");
  if (stride < 1 || stride > length) throw std::invalid_argument("window stride must lie in [1, length]");
}

std::vector<Window> extract_windows(const TrialFile& trial, const WindowSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.length);
  const auto stride = static_cast<std::size_t>(spec.stride);
  if (trial.samples.size() < n) {
    throw std::invalid_argument("extract_windows: trial has " + std::to_string(trial.samples.size()) +
                                " samples, window needs " + std::to_string(n));
  }
  const std::size_t count = (trial.samples.size() - n) / stride + 1;
  std::vector<Window> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Window w;
    w.start = k * stride;
    w.center = w.start + n / 2;
    w.rate_hz = trial.meta.rate_hz;
    w.t_center = trial.samples[w.center].t;
    w.target = trial.samples[w.center].gt;
    w.data.resize(6, static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      const auto& s = trial.samples[w.start + j];
      w.data.col(static_cast<Eigen::Index>(j)) << s.gyro, s.accel;
    }
    out.push_back(std::move(w));
  }
  return out;
}

TrialFile resample(const TrialFile& trial, double target_rate_hz) {
  if (!(target_rate_hz > 0.0)) throw std::invalid_argument("resample: target rate must be positive");
  if (trial.samples.size() < 2) throw std::invalid_argument("resample: need at least 2 samples");
  if (target_rate_hz == trial.meta.rate_hz) return trial;

  TrialFile out;
  out.meta = trial.meta;
  out.meta.rate_hz = target_rate_hz;
  out.has_ground_truth = trial.has_ground_truth;

  const auto& in = trial.samples;
  const double t0 = in.front().t;
  const double t_end = in.back().t;
  std::size_t seg = 0;
  for (std::size_t j = 0;; ++j) {
    const double t = t0 + static_cast<double>(j) / target_rate_hz;
    if (t > t_end + 1e-9) break;
    while (seg + 2 < in.size() && in[seg + 1].t < t) ++seg;
    const auto& a = in[seg];
    const auto& b = in[seg + 1];
    const double u = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
    imu::ImuSample s;
    s.t = t;
    s.gyro = (1.0 - u) * a.gyro + u * b.gyro;
    s.accel = (1.0 - u) * a.accel + u * b.accel;
    if (a.gt && b.gt) s.gt = slerp(*a.gt, *b.gt, u);
    out.samples.push_back(s);
  }
  out.duplicates = find_duplicates(out.samples);
  return out;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw data_error("cannot open manifest " + manifest_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw data_error("manifest " + manifest_path.string() + ": " + e.what());
  }
  if (!j.contains("trials") || !j["trials"].is_array()) throw data_error("manifest: missing 'trials' array");
  const std::filesystem::path base = manifest_path.parent_path();
  std::vector<ManifestEntry> out;
  for (const auto& t : j["trials"]) {
    if (!t.contains("path")) throw data_error("manifest: trial entry without 'path'");
    ManifestEntry e;
    e.path = resolve(base, t["path"].get<std::string>());
    e.meta_path = t.contains("meta_path") ? resolve(base, t["meta_path"].get<std::string>()) : sidecar_path(e.path);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace attikit::data
