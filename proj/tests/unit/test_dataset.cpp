#include "attikit/dataset.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace attikit;
using namespace attikit::data;
namespace fs = std::filesystem;

namespace {

TrialFile synthetic(std::size_t n, double rate = 100.0, bool gt = true) {
  TrialFile t;
  t.meta = TrialMeta{"synthetic", rate, "unit", 1.0};
  t.has_ground_truth = gt;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    imu::ImuSample s;
    s.t = static_cast<double>(k) / rate;
    s.gyro = Vector3d(nd(rng), nd(rng), nd(rng));
    s.accel = Vector3d(nd(rng), nd(rng), 9.8 + nd(rng));
    if (gt) s.gt = Quaterniond(Quaterniond(1.0, 0.1 * nd(rng), 0.1 * nd(rng), 0.1 * nd(rng)).normalized());
    t.samples.push_back(s);
  }
  return t;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("attikit_test_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string parse_error(const std::string& body) {
  std::istringstream in(body);
  try {
    parse_trial_csv(in, TrialMeta{"x", 100.0, "", 1.0});
  } catch (const data_error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Windows, CountAndCentersMatchSlicing) {
  const TrialFile t = synthetic(1000);
  const auto w = extract_windows(t, WindowSpec{200, 10});
  ASSERT_EQ(w.size(), 81u);
  EXPECT_EQ(w.front().center, 100u);
  EXPECT_EQ(w.back().center, 900u);
  for (std::size_t k = 0; k < w.size(); ++k) {
    // oracle: slice [10k, 10k + 200)
    const std::size_t start = 10 * k;
    ASSERT_EQ(w[k].start, start);
    ASSERT_EQ(w[k].data.cols(), 200);
    EXPECT_EQ(w[k].center, start + 100);
    EXPECT_EQ(w[k].t_center, t.samples[start + 100].t);
    EXPECT_EQ(*w[k].target, *t.samples[start + 100].gt);
    for (int j = 0; j < 200; j += 37) {
      const auto& s = t.samples[start + static_cast<std::size_t>(j)];
      EXPECT_EQ(w[k].data(0, j), s.gyro.x());
      EXPECT_EQ(w[k].data(2, j), s.gyro.z());
      EXPECT_EQ(w[k].data(3, j), s.accel.x());
      EXPECT_EQ(w[k].data(5, j), s.accel.z());
    }
  }
}

TEST(Windows, EdgeRemainderIsDropped) {
  const TrialFile t = synthetic(215);
  const auto w = extract_windows(t, WindowSpec{200, 10});
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w.back().start, 10u);
  EXPECT_EQ(extract_windows(synthetic(200), WindowSpec{200, 10}).size(), 1u);
}

TEST(Windows, Validation) {
  const TrialFile t = synthetic(300);
  EXPECT_THROW(extract_windows(t, WindowSpec{201, 10}), std::invalid_argument);
  EXPECT_THROW(extract_windows(t, WindowSpec{200, 0}), std::invalid_argument);
  EXPECT_THROW(extract_windows(t, WindowSpec{200, 201}), std::invalid_argument);
  EXPECT_THROW(extract_windows(synthetic(100), WindowSpec{200, 10}), std::invalid_argument);
}

TEST(TrialCsv, RoundTripIsValueIdentical) {
  TempDir dir;
  for (bool gt : {true, false}) {
    TrialFile t = synthetic(257, 200.0, gt);
    t.meta.name = gt ? "with_gt" : "no_gt";
    const fs::path csv = dir.path() / (t.meta.name + ".csv");
    save_trial(t, csv);
    EXPECT_TRUE(fs::exists(dir.path() / (t.meta.name + ".json")));
    const TrialFile back = load_trial(csv);
    EXPECT_EQ(back.meta.name, t.meta.name);
    EXPECT_EQ(back.meta.rate_hz, 200.0);
    EXPECT_EQ(back.has_ground_truth, gt);
    ASSERT_EQ(back.samples.size(), t.samples.size());
    for (std::size_t k = 0; k < t.samples.size(); ++k) {
      EXPECT_EQ(back.samples[k].t, t.samples[k].t);
      EXPECT_EQ(back.samples[k].gyro, t.samples[k].gyro);
      EXPECT_EQ(back.samples[k].accel, t.samples[k].accel);
      EXPECT_EQ(back.samples[k].gt.has_value(), gt);
      if (gt) EXPECT_LT((*back.samples[k].gt - *t.samples[k].gt).norm(), 1e-15);
    }
  }
}

TEST(TrialCsv, AccelSignFlipsOnLoadAndSave) {
  TempDir dir;
  TrialFile t = synthetic(10);
  const fs::path csv = dir.path() / "flip.csv";
  save_trial(t, csv);
  TrialMeta m = load_meta(sidecar_path(csv));
  m.accel_sign = -1.0;
  save_meta(m, sidecar_path(csv));
  const TrialFile flipped = load_trial(csv);
  EXPECT_EQ(flipped.samples[3].accel, Vector3d(-t.samples[3].accel));
  std::ostringstream out;
  write_trial_csv(flipped, out);
  std::istringstream in(out.str());
  const TrialFile again = parse_trial_csv(in, flipped.meta);
  EXPECT_EQ(again.samples[3].accel, flipped.samples[3].accel);
}

TEST(TrialCsv, ErrorsNameTheRow) {
  const std::string header = "t,gx,gy,gz,ax,ay,az\n";
  EXPECT_NE(parse_error(header + "0,0,0,0,0,0,9.8\n0.01,0,0,0,0,x,9.8\n").find("row 2"), std::string::npos);
  EXPECT_NE(parse_error(header + "0,0,0,0,0,0,9.8\n0.01,0,0,0,0,9.8\n").find("row 2"), std::string::npos);
  EXPECT_NE(parse_error(header + "0,0,0,0,0,0,9.8\n0,0,0,0,0,0,9.8\n").find("row 2: timestamps"), std::string::npos);
  EXPECT_NE(parse_error(header + "0,0,0,0,0,0,nan\n").find("row 1"), std::string::npos);
  EXPECT_NE(parse_error("t,gx,gy,gz,ax,ay,az,qw,qx,qy,qz\n0,0,0,0,0,0,9.8,1,1,0,0\n").find("row 1: ground-truth"),
            std::string::npos);
  EXPECT_NE(parse_error("time,gx\n").find("header"), std::string::npos);
  EXPECT_NE(parse_error("").find("missing header"), std::string::npos);
}

TEST(TrialCsv, GroundTruthIsRenormalized) {
  std::istringstream in("t,gx,gy,gz,ax,ay,az,qw,qx,qy,qz\n0,0,0,0,0,0,9.8,1.0004,0,0,0\n");
  const TrialFile t = parse_trial_csv(in, TrialMeta{"x", 100.0, "", 1.0});
  EXPECT_DOUBLE_EQ(t.samples[0].gt->norm(), 1.0);
}

TEST(TrialCsv, MissingFilesAndMeta) {
  TempDir dir;
  EXPECT_THROW(load_trial(dir.path() / "nope.csv"), data_error);
  std::ofstream(dir.path() / "bad.json") << R"({"name": "b", "rate_hz": -5})";
  EXPECT_THROW(load_meta(dir.path() / "bad.json"), data_error);
  std::ofstream(dir.path() / "sign.json") << R"({"name": "b", "rate_hz": 5, "accel_sign": 2})";
  EXPECT_THROW(load_meta(dir.path() / "sign.json"), data_error);
  EXPECT_EQ(sidecar_path("a/b/trial.csv"), fs::path("a/b/trial.json"));
}

TEST(Duplicates, CountsRunsAndDrops) {
  TrialFile t = synthetic(20);
  // 3 copies after sample 4 and 1 after sample 10
  for (std::size_t k : {5, 6, 7, 11}) {
    t.samples[k].gyro = t.samples[k - 1].gyro;
    t.samples[k].accel = t.samples[k - 1].accel;
  }
  const DuplicateReport r = find_duplicates(t.samples);
  EXPECT_EQ(r.duplicate_samples, 4u);
  EXPECT_EQ(r.runs, 2u);
  EXPECT_DOUBLE_EQ(r.fraction, 4.0 / 20.0);

  std::ostringstream out;
  write_trial_csv(t, out);
  std::istringstream in(out.str());
  const TrialFile kept = parse_trial_csv(in, t.meta, LoadOptions{true});
  EXPECT_EQ(kept.samples.size(), 16u);
  EXPECT_EQ(kept.duplicates.duplicate_samples, 4u);
}

TEST(Resample, SameRateIsExactCopy) {
  const TrialFile t = synthetic(50);
  const TrialFile r = resample(t, 100.0);
  ASSERT_EQ(r.samples.size(), t.samples.size());
  for (std::size_t k = 0; k < t.samples.size(); ++k) {
    EXPECT_EQ(r.samples[k].gyro, t.samples[k].gyro);
    EXPECT_EQ(r.samples[k].t, t.samples[k].t);
  }
}

TEST(Resample, LinearSignalsAreExact) {
  TrialFile t = synthetic(101, 100.0);
  for (auto& s : t.samples) {
    s.gyro = Vector3d(2.0 * s.t, -s.t, 0.5);
    s.accel = Vector3d(0.0, 3.0 * s.t + 1.0, 9.8);
    s.gt = axis_angle_to_quat(Vector3d::UnitZ(), 0.5 * s.t);
  }
  const TrialFile r = resample(t, 40.0);
  ASSERT_EQ(r.samples.size(), 41u);
  EXPECT_EQ(r.meta.rate_hz, 40.0);
  for (const auto& s : r.samples) {
    EXPECT_NEAR(s.gyro.x(), 2.0 * s.t, 1e-12);
    EXPECT_NEAR(s.accel.y(), 3.0 * s.t + 1.0, 1e-12);
    EXPECT_LT(error_angle(*s.gt, axis_angle_to_quat(Vector3d::UnitZ(), 0.5 * s.t)), 1e-7);
  }
  EXPECT_THROW(resample(t, 0.0), std::invalid_argument);
}

TEST(Manifest, ResolvesRelativePaths) {
  TempDir dir;
  fs::create_directories(dir.path() / "sub");
  std::ofstream(dir.path() / "sub" / "m.json")
      << R"({"trials": [{"path": "a.csv"}, {"path": "/abs/b.csv", "meta_path": "meta/b.json"}]})";
  const auto m = load_manifest(dir.path() / "sub" / "m.json");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].path, dir.path() / "sub" / "a.csv");
  EXPECT_EQ(m[0].meta_path, dir.path() / "sub" / "a.json");
  EXPECT_EQ(m[1].path, fs::path("/abs/b.csv"));
  EXPECT_EQ(m[1].meta_path, dir.path() / "sub" / "meta" / "b.json");

  std::ofstream(dir.path() / "bad.json") << R"({"runs": []})";
  EXPECT_THROW(load_manifest(dir.path() / "bad.json"), data_error);
}

TEST(TrialCsv, MinimalFixtureAndDeclaredRate) {
  std::istringstream in("t,gx,gy,gz,ax,ay,az\n0,0,0,0,0,0,9.8\n0.01,0,0,0,0,0,9.8\n0.02,0,0,0,0,0,9.8\n");
  const TrialFile t = parse_trial_csv(in, TrialMeta{"min", 100.0, "", 1.0});
  EXPECT_EQ(t.samples.size(), 3u);
  EXPECT_EQ(t.meta.rate_hz, 100.0);
  EXPECT_FALSE(t.has_ground_truth);

  TempDir dir;
  std::ofstream(dir.path() / "broad.json") << R"({"name": "broad_like", "rate_hz": 286.3, "source": "broad"})";
  std::ofstream(dir.path() / "broad.csv") << "t,gx,gy,gz,ax,ay,az\n0,0,0,0,0,0,9.8\n";
  EXPECT_EQ(load_trial(dir.path() / "broad.csv").meta.rate_hz, 286.3);
}

TEST(TrialCsv, DecreasingTimeNamesRowSeven) {
  std::string body = "t,gx,gy,gz,ax,ay,az\n";
  const double ts[] = {0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.045, 0.07};
  for (double t : ts) body += std::to_string(t) + ",0,0,0,0,0,9.8\n";
  EXPECT_NE(parse_error(body).find("row 7"), std::string::npos) << parse_error(body);
}
