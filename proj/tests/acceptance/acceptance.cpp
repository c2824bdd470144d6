// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "attikit/eval.hpp"
#include "attikit/filters.hpp"
#include "attikit/losses.hpp"
#include "attikit/nn/model.hpp"
#include "attikit/sched.hpp"
#include "attikit/sim.hpp"
#include "../unit/test_util.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace attikit;
namespace fs = std::filesystem;
using attikit::testing::random_unit_quat;
using attikit::testing::random_unit_vector;
using attikit::testing::uniform;

namespace {

constexpr double kPi = std::numbers::pi;
const fs::path kData = ATTIKIT_TEST_DATA;
const std::string kCli = ATTIKIT_CLI;

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(const std::string& args) {
  const std::string cmd = "\"" + kCli + "\" " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

data::TrialFile simulate_file(const fs::path& spec) { return sim::simulate(sim::parse_spec(slurp(spec), 0)); }

// --- criteria ----------------------------------------------------------------

Outcome quaternion_algebra() {
  const Quaterniond i(0, 1, 0, 0), j(0, 0, 1, 0), k(0, 0, 0, 1);
  bool ok = hamilton_product(i, j) == k && hamilton_product(j, k) == i && hamilton_product(k, i) == j;
  std::mt19937_64 rng(100);
  double assoc = 0.0, inv = 0.0, euler = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const Quaterniond a = random_unit_quat(rng), b = random_unit_quat(rng), c = random_unit_quat(rng);
    assoc = std::max(assoc, (hamilton_product(hamilton_product(a, b), c) - hamilton_product(a, hamilton_product(b, c))).norm());
    inv = std::max(inv, (hamilton_product(a, conjugate(a)) - identity_quat<double>()).norm());
    const EulerAnglesd e{uniform(rng, -kPi + 1e-9, kPi), uniform(rng, -1.48, 1.48), uniform(rng, -kPi + 1e-9, kPi)};
    const EulerAnglesd back = quat_to_euler(euler_to_quat(e));
    euler = std::max({euler, std::abs(back.roll - e.roll), std::abs(back.pitch - e.pitch), std::abs(back.yaw - e.yaw)});
  }
  ok = ok && assoc < 1e-12 && inv < 1e-12 && euler < 1e-9;
  return {ok, "assoc " + fmt("%.1e", assoc) + ", conj " + fmt("%.1e", inv) + ", euler " + fmt("%.1e", euler)};
}

constexpr loss::LossKind kScalar[] = {loss::LossKind::QIP,  loss::LossKind::QME,     loss::LossKind::QMEA,
                                      loss::LossKind::QMEA_NT, loss::LossKind::E_I, loss::LossKind::E_I_NT,
                                      loss::LossKind::QSGD, loss::LossKind::QSGD2};

Outcome loss_suite() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double zero = 0.0, cover = 0.0, chain = 0.0;
  bool monotone = true;
  for (auto kind : kScalar) {
    for (int n = 0; n < 200; ++n) {
      const Quaterniond q = random_unit_quat(rng), p = random_unit_quat(rng);
      zero = std::max(zero, std::abs(loss::pair_loss(kind, q, q)));
      cover = std::max(cover, std::abs(loss::pair_loss(kind, q, Quaterniond(-p)) - loss::pair_loss(kind, q, p)));
    }
    for (int a = 0; a < 4; ++a) {
      const auto pts = loss::loss_landscape(kind, random_unit_vector(rng), 181);
      for (std::size_t s = 1; s < pts.size(); ++s) monotone = monotone && pts[s].loss <= pts[s - 1].loss + 1e-7;
    }
  }
  for (int n = 0; n < 1000; ++n) {
    const Quaterniond q = random_unit_quat(rng), p = random_unit_quat(rng);
    const double qip = loss::qip(q, p);
    chain = std::max({chain, std::abs(loss::qmea_nt(q, p) - qip), std::abs(loss::qsgd(q, p) - qip)});
  }
  const double secs = seconds_since(t0);
  // acos / sqrt forms sit ~1e-8 above zero at |w| = 1 - ulp
  const bool ok = zero < 1e-7 && cover <= 1e-12 && monotone && chain <= 1e-12 && secs < 5.0;
  return {ok, "zero " + fmt("%.1e", zero) + ", cover " + fmt("%.1e", cover) + ", chain " + fmt("%.1e", chain) +
                  (monotone ? ", monotone" : ", NOT monotone") + ", " + fmt("%.2f s", secs)};
}

double kink_distance(loss::LossKind kind, const Quaterniond& q, const Quaterniond& p) {
  const Quaterniond e = loss::mult_error(q, p);
  const double d = std::abs(e[0]);
  double m = std::min(d, 1.0 - d);
  if (kind == loss::LossKind::QME) m = e.tail<3>().cwiseAbs().minCoeff();
  if (kind == loss::LossKind::E_I || kind == loss::LossKind::E_I_NT) {
    const double r = std::hypot(e[0], e[3]);
    m = std::min(r, 1.0 - r);
  }
  if (kind == loss::LossKind::QIP_MSE) m = 1.0;
  if (kind == loss::LossKind::QIPA) m = std::min(1.0 - q.dot(p), 1.0 + q.dot(p));
  return m;
}

Outcome gradient_checks() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(102);
  double worst = 0.0;
  int kinds = 0;
  for (auto kind : {loss::LossKind::QIP, loss::LossKind::QIPA, loss::LossKind::QIP_MSE, loss::LossKind::QME,
                    loss::LossKind::QMEA, loss::LossKind::QMEA_NT, loss::LossKind::E_I, loss::LossKind::E_I_NT,
                    loss::LossKind::QSGD, loss::LossKind::QSGD2}) {
    ++kinds;
    for (int checked = 0; checked < 100;) {
      const Quaterniond q = random_unit_quat(rng), p = random_unit_quat(rng);
      if (kink_distance(kind, q, p) < 1e-3) continue;
      const Eigen::Vector4d g = loss::loss_gradient(kind, q, p);
      Eigen::Vector4d fd;
      for (int c = 0; c < 4; ++c) {
        Quaterniond up = p, dn = p;
        up[c] += 1e-6;
        dn[c] -= 1e-6;
        fd[c] = (loss::pair_loss(kind, q, up) - loss::pair_loss(kind, q, dn)) / 2e-6;
      }
      worst = std::max(worst, (g - fd).norm() / std::max({g.norm(), fd.norm(), 1e-8}));
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs < 10.0,
          std::to_string(kinds) + " losses x 100 pairs, worst rel " + fmt("%.1e", worst) + ", " + fmt("%.2f s", secs)};
}

Outcome measurement_statistics() {
  imu::TrajectorySpec s;
  s.duration = 999.99;
  const auto truth = imu::generate_trajectory(s);
  const imu::NoiseSpec noise{0.02, 0.3, 103};
  imu::BiasSpec bias;
  bias.gyro = Vector3d(0.01, -0.02, 0.005);
  bias.accel = Vector3d(0.1, 0.0, -0.05);
  const auto m = imu::measure(truth, noise, bias);
  const double n = static_cast<double>(m.size());
  Vector3d gm = Vector3d::Zero(), am = Vector3d::Zero();
  for (const auto& x : m) {
    gm += x.gyro;
    am += x.accel;
  }
  gm /= n;
  am /= n;
  Vector3d gv = Vector3d::Zero(), av = Vector3d::Zero();
  for (const auto& x : m) {
    gv += (x.gyro - gm).cwiseAbs2();
    av += (x.accel - am).cwiseAbs2();
  }
  const Vector3d gsd = (gv / (n - 1)).cwiseSqrt(), asd = (av / (n - 1)).cwiseSqrt();
  const Vector3d a_expected = Vector3d(0, 0, imu::kStandardGravity) - bias.accel;
  double sd_err = 0.0, bias_z = 0.0;
  for (int i = 0; i < 3; ++i) {
    sd_err = std::max({sd_err, std::abs(gsd[i] / noise.gyro_std - 1.0), std::abs(asd[i] / noise.accel_std - 1.0)});
    bias_z = std::max({bias_z, std::abs(gm[i] + bias.gyro[i]) / (noise.gyro_std / std::sqrt(n)),
                       std::abs(am[i] - a_expected[i]) / (noise.accel_std / std::sqrt(n))});
  }
  return {m.size() == 100000 && sd_err < 0.02 && bias_z < 3.0,
          std::to_string(m.size()) + " samples, sigma off " + fmt("%.2f%%", 100 * sd_err) + ", bias " +
              fmt("%.2f", bias_z) + " sigma/sqrt(n)"};
}

Outcome dead_reckoning() {
  imu::TrajectorySpec s;
  s.kind = imu::TrajectoryKind::ConstantRate;
  s.duration = 10.0;
  s.initial = euler_to_quat(EulerAnglesd{0.3, 0.2, -0.5});
  s.body_rate = Vector3d(0.4, -0.3, 0.8);
  const auto tr = imu::generate_trajectory(s);
  const auto q = imu::dead_reckon(imu::measure(tr, {}, {}), tr.front().q);
  const double final_err = error_angle(q.back(), tr.back().q);

  imu::TrajectorySpec still;
  still.duration = 10.0;
  imu::BiasSpec bias;
  bias.gyro = Vector3d(0.003, -0.004, 0.002);
  const auto st = imu::generate_trajectory(still);
  const auto qb = imu::dead_reckon(imu::measure(st, {}, bias), st.front().q);
  double growth = 0.0;
  for (std::size_t k = 100; k < st.size(); k += 100) {
    const double expected = bias.gyro.norm() * st[k].t;
    growth = std::max(growth, std::abs(error_angle(qb[k], st[k].q) - expected) / expected);
  }
  return {final_err < 1e-4 && growth < 0.01,
          "final " + fmt("%.1e rad", final_err) + ", |b| t growth off " + fmt("%.3f%%", 100 * growth)};
}

Outcome filter_convergence() {
  const auto tilt = simulate_file(kData / "specs" / "tilt_static.json");
  const auto noisy = simulate_file(kData / "specs" / "noisy_static.json");
  auto rmse = [](const std::vector<Quaterniond>& est, const data::TrialFile& t) {
    std::vector<double> e;
    for (std::size_t k = 0; k < est.size(); ++k) e.push_back(rad2deg(error_angle(*t.samples[k].gt, est[k])));
    return rmse_angle<double>(e);
  };
  const double dr = rmse(imu::dead_reckon(noisy.samples, *noisy.samples.front().gt), noisy);
  bool ok = true;
  std::string detail;
  for (auto kind : {filters::FilterKind::CF, filters::FilterKind::Madgwick, filters::FilterKind::Mahony,
                    filters::FilterKind::EKF}) {
    auto cfg = filters::FilterConfig::defaults(kind);
    cfg.initial_attitude = identity_quat<double>();
    const auto q = filters::run(cfg, tilt.samples);
    const double roll_err = std::abs(rad2deg(quat_to_euler(error_quat(*tilt.samples.back().gt, q.back())).roll));
    const double noisy_rmse = rmse(filters::run(filters::FilterConfig::defaults(kind), noisy.samples), noisy);
    ok = ok && roll_err < 0.5 && noisy_rmse < dr;
    detail += std::string(filters::kind_name(kind)) + " " + fmt("%.3f", roll_err) + "/" + fmt("%.2f", noisy_rmse) + ", ";
  }
  return {ok, detail + "dead-reckon " + fmt("%.2f", dr) + " (roll deg at 5 s / noisy rmse deg)"};
}

Outcome windowing() {
  data::TrialFile t;
  t.meta.rate_hz = 100.0;
  for (int k = 0; k < 1000; ++k) {
    imu::ImuSample s;
    s.t = k * 0.01;
    s.gyro = Vector3d(k, -k, 2 * k);
    s.accel = Vector3d(0.5 * k, 1, k * k);
    t.samples.push_back(s);
  }
  const auto w = data::extract_windows(t, {200, 10});
  bool ok = w.size() == 81;
  for (std::size_t i = 0; ok && i < w.size(); ++i) {
    ok = w[i].center == 100 + 10 * i;
    for (int j = 0; ok && j < 200; ++j) {
      const auto& s = t.samples[10 * i + static_cast<std::size_t>(j)];
      for (int r = 0; r < 3; ++r) ok = ok && w[i].data(r, j) == s.gyro[r] && w[i].data(3 + r, j) == s.accel[r];
    }
  }
  return {ok, std::to_string(w.size()) + " windows, centers " + std::to_string(w.front().center) + ".." +
                  std::to_string(w.back().center)};
}

using Td = nn::Tensor<double>;

Td rand_tensor(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Td x(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) x(i, j) = n(rng);
  return x;
}

std::vector<double> rand_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 0.5);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

Td lstm_ref(const Td& x, const std::vector<double>& W, const std::vector<double>& U, const std::vector<double>& b, int u) {
  const int d = static_cast<int>(x.rows());
  std::vector<double> h(u, 0.0), c(u, 0.0);
  Td out(u, x.cols());
  auto sg = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (int t = 0; t < x.cols(); ++t) {
    std::vector<double> z(4 * u);
    for (int r = 0; r < 4 * u; ++r) {
      z[r] = b[r];
      for (int i = 0; i < d; ++i) z[r] += W[r * d + i] * x(i, t);
      for (int i = 0; i < u; ++i) z[r] += U[r * u + i] * h[i];
    }
    for (int q = 0; q < u; ++q) {
      c[q] = sg(z[u + q]) * c[q] + sg(z[q]) * std::tanh(z[2 * u + q]);
      h[q] = sg(z[3 * u + q]) * std::tanh(c[q]);
      out(q, t) = h[q];
    }
  }
  return out;
}

Outcome neural_layers() {
  std::mt19937_64 rng(104);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int cin = 1 + trial % 3, cout = 2 + trial % 2, k = 1 + trial % 5, t = 8 + trial;
    const Td x = rand_tensor(cin, t, rng);
    const auto w = rand_vec(static_cast<std::size_t>(cout * cin * k), rng), b = rand_vec(cout, rng);
    const Td y = nn::conv1d_forward<double>(x, w, b, cout, k);
    for (int o = 0; o < cout; ++o)
      for (int s = 0; s < t; ++s) {
        double ref = b[o];
        for (int c = 0; c < cin; ++c)
          for (int j = 0; j < k; ++j)
            if (s + j - (k - 1) >= 0) ref += w[(o * cin + c) * k + j] * x(c, s + j - (k - 1));
        worst = std::max(worst, std::abs(y(o, s) - ref));
      }
    const Td p = nn::maxpool1d(x, 2);
    for (int c = 0; c < cin; ++c)
      for (int s = 0; s < t / 2; ++s) worst = std::max(worst, std::abs(p(c, s) - std::max(x(c, 2 * s), x(c, 2 * s + 1))));
    const int u = 2 + trial % 3;
    const auto W = rand_vec(static_cast<std::size_t>(4 * u * cin), rng), U = rand_vec(static_cast<std::size_t>(4 * u * u), rng),
               bb = rand_vec(static_cast<std::size_t>(4 * u), rng);
    const auto W2 = rand_vec(W.size(), rng), U2 = rand_vec(U.size(), rng), b2 = rand_vec(bb.size(), rng);
    worst = std::max(worst, (nn::lstm_forward<double>(x, {W, U, bb}, u) - lstm_ref(x, W, U, bb, u)).cwiseAbs().maxCoeff());
    const Td bi = nn::bilstm_forward<double>(x, {W, U, bb}, {W2, U2, b2}, u);
    const Td back = lstm_ref(x.rowwise().reverse(), W2, U2, b2, u).rowwise().reverse();
    worst = std::max(worst, (bi.topRows(u) - lstm_ref(x, W, U, bb, u)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (bi.bottomRows(u) - back).cwiseAbs().maxCoeff());
  }

  // future perturbation
  const Td x = rand_tensor(3, 40, rng);
  const auto w = rand_vec(4 * 3 * 11, rng), b = rand_vec(4, rng);
  Td x2 = x;
  x2.rightCols(15) = rand_tensor(3, 15, rng);
  const bool causal = nn::conv1d_forward<double>(x, w, b, 4, 11).leftCols(25) ==
                      nn::conv1d_forward<double>(x2, w, b, 4, 11).leftCols(25);

  // unit-norm outputs on both architectures
  nn::ModelAOptions ao;
  ao.filters = 8;
  ao.dense_units = 16;
  ao.lstm_units = 8;
  ao.rate_units = 8;
  const auto ga = nn::build_model_a(40, ao);
  const auto gb = nn::build_model_b(40);
  const auto trial = simulate_file(kData / "specs" / "turning.json");
  double norm_err = 0.0;
  int outputs = 0;
  for (const auto& win : data::extract_windows(trial, {40, 40})) {
    if (outputs >= 60) break;
    norm_err = std::max(norm_err, std::abs(nn::forward(ga, nn::init_weights(ga, outputs), win).q.norm() - 1.0));
    norm_err = std::max(norm_err, std::abs(nn::forward(gb, nn::init_weights(gb, outputs), win).q.norm() - 1.0));
    outputs += 2;
  }
  std::int64_t lstm1 = 0;
  for (const auto& p : nn::build_model_b(200).parameters())
    if (p.name.rfind("lstm1/", 0) == 0) lstm1 += p.size();

  const bool ok = worst <= 1e-6 && causal && norm_err <= 1e-6 && lstm1 == 11400;
  return {ok, "oracle diff " + fmt("%.1e", worst) + (causal ? ", causal bit-exact" : ", causal BROKEN") +
                  ", unit-norm off " + fmt("%.1e", norm_err) + " over " + std::to_string(outputs) +
                  " outputs, lstm1 params " + std::to_string(lstm1)};
}

Outcome toy_training() {
  nn::ModelBOptions o;
  o.lstm_units = 4;
  o.dense_units = 8;
  o.rate_units = 8;
  const int n = 16;
  const auto g = nn::build_model_b(n, o);
  sim::SimulationSpec s;
  s.trajectory.kind = imu::TrajectoryKind::Composite;
  s.trajectory.duration = 10.0;
  s.trajectory.initial = euler_to_quat(EulerAnglesd{0.3, -0.2, 0.6});
  s.trajectory.body_rate = Vector3d(0.05, 0.0, 0.1);
  s.trajectory.amplitude = 0.3;
  s.trajectory.frequency = 0.4;
  s.noise = imu::NoiseSpec{0.01, 0.05, 6};
  const auto windows = data::extract_windows(sim::simulate(s), {n, n});
  std::vector<data::Window> batch;
  for (std::size_t k = 0; k < windows.size() && batch.size() < 10; k += 6) batch.push_back(windows[k]);

  const auto t0 = Clock::now();
  const auto r = nn::toy_train(g, nn::init_weights(g, 8), batch, loss::LossKind::QMEA_NT, 200,
                               sched::ScheduleSpec::constant(0.5));
  const double secs = seconds_since(t0);
  const double ratio = r.loss_trace.back() / r.loss_trace.front();
  return {batch.size() == 10 && ratio < 0.5 && secs < 60.0,
          std::to_string(g.parameter_count()) + " params, loss " + fmt("%.4f", r.loss_trace.front()) + " -> " +
              fmt("%.4f", r.loss_trace.back()) + " (x" + fmt("%.3f", ratio) + "), " + fmt("%.1f s", secs)};
}

Outcome schedules() {
  using namespace sched;
  const bool expo = lr_at(ScheduleSpec::exponential(0.1, 0.5, 100.0), 100) == 0.05;
  const bool step = lr_at(ScheduleSpec::stepwise(0.1, 0.5, {10}), 10) == 0.05;
  const ScheduleSpec cyc = ScheduleSpec::cyclical(1e-4, 1e-2, 1000.0 / kPi);
  const bool c0 = lr_at(cyc, 0) == 1e-4 / 2 + 1e-2 / 2 * 2 && std::abs(lr_at(cyc, 0) - 0.01005) < 1e-17;
  const bool cpi = std::abs(lr_at(cyc, 1000) - 5e-5) < 1e-15;
  const ScheduleSpec per = ScheduleSpec::cyclical(1e-4, 1e-2, 700.0 / (2 * kPi));
  double period = 0.0;
  for (long k = 0; k < 2000; ++k) period = std::max(period, std::abs(lr_at(per, k + 700) - lr_at(per, k)));

  const auto grid = geometric_grid();
  const std::size_t planted = 11;
  const double xs = std::log(grid[planted]);
  const auto found = lr_find([xs](double lr) { return 1.0 - std::tanh((std::log(lr) - xs) / 1.5); }, grid);
  const bool ok = expo && step && c0 && cpi && period <= 1e-12 && found.lr == grid[planted];
  return {ok, std::string(expo ? "0.05 ok" : "0.05 WRONG") + (c0 ? ", 0.01005 ok" : ", 0.01005 WRONG") +
                  (cpi ? ", 5e-5 ok" : ", 5e-5 WRONG") + ", period off " + fmt("%.1e", period) + ", planted lr " +
                  fmt("%.3g", grid[planted]) + " picked " + fmt("%.3g", found.lr)};
}

class EchoEstimator : public eval::Estimator {
 public:
  std::string name() const override { return "Echo"; }
  std::vector<eval::Estimate> estimate(const data::TrialFile& trial) const override {
    std::vector<eval::Estimate> out;
    for (std::size_t k = 0; k < trial.samples.size(); ++k) out.push_back({k, *trial.samples[k].gt});
    return out;
  }
};

Outcome harness_determinism(const fs::path& work) {
  const fs::path manifest = kData / "manifest" / "manifest.json";
  const std::string args = "evaluate --manifest \"" + manifest.string() +
                           "\" --estimator dead-reckon --estimator cf --estimator madgwick --estimator mahony "
                           "--estimator ekf --format csv --threads 4 --out ";
  const int rc1 = run(args + "\"" + (work / "run1.csv").string() + "\"");
  const int rc2 = run(args + "\"" + (work / "run2.csv").string() + "\"");
  const std::string a = slurp(work / "run1.csv"), b = slurp(work / "run2.csv");
  const bool same = rc1 == 0 && rc2 == 0 && !a.empty() && a == b;

  const auto box = eval::boxplot_stats(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  const bool box_ok = box.median == 5 && box.q1 == 3 && box.q3 == 7 && box.whisker_lo == 1 && box.whisker_hi == 9 &&
                      box.outlier_count == 0;

  const auto report = eval::evaluate(data::load_manifest(manifest), {std::make_shared<EchoEstimator>()});
  const std::string md = eval::render_report(report, eval::ReportFormat::Markdown);
  bool echo_zero = !report.rows.empty();
  for (const auto& r : report.rows) echo_zero = echo_zero && r.status == eval::RowStatus::Ok && fmt("%.2f", r.max_deg) == "0.00";
  echo_zero = echo_zero && md.find("| Average All | 0.00 |") != std::string::npos;
  return {same && box_ok && echo_zero,
          std::string(same ? "two runs byte-identical (" + std::to_string(a.size()) + " bytes)" : "runs DIFFER") +
              (box_ok ? ", boxplot {5,3,7,1,9,0}" : ", boxplot WRONG") + (echo_zero ? ", echo 0.00" : ", echo NONZERO")};
}

Outcome end_to_end(const fs::path& work) {
  const auto t0 = Clock::now();
  const fs::path dir = work / "smoke";
  fs::create_directories(dir);
  std::string manifest = "{\"trials\": [";
  bool sim_ok = true;
  const char* specs[] = {"noisy_static", "rolling", "turning"};
  for (std::size_t i = 0; i < std::size(specs); ++i) {
    const fs::path csv = dir / (std::string(specs[i]) + ".csv");
    sim_ok = sim_ok && run("simulate --spec \"" + (kData / "specs" / (std::string(specs[i]) + ".json")).string() +
                           "\" --out \"" + csv.string() + "\"") == 0;
    manifest += std::string(i ? ", " : "") + "{\"path\": \"" + csv.filename().string() + "\"}";
  }
  manifest += "]}\n";
  std::ofstream(dir / "manifest.json") << manifest;
  const int rc = run("evaluate --manifest \"" + (dir / "manifest.json").string() +
                     "\" --estimator dead-reckon --estimator cf --estimator madgwick --estimator mahony --estimator ekf"
                     " --format markdown --out \"" + (dir / "report.md").string() + "\"");
  const std::string got = slurp(dir / "report.md");
  const std::string golden = slurp(kData / "golden" / "smoke.md");
  const double secs = seconds_since(t0);
  const bool ok = sim_ok && rc == 0 && got.find("| Average All |") != std::string::npos && got == golden;
  return {ok, std::string(sim_ok ? "simulated 3 trials" : "simulate FAILED") + ", evaluate exit " + std::to_string(rc) +
                  (got == golden ? ", golden match" : ", golden MISMATCH") + ", " + fmt("%.2f s", secs)};
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const fs::path work = fs::current_path() / "acceptance_work";
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"quaternion algebra", quaternion_algebra},
      {"loss suite", loss_suite},
      {"gradient checks", gradient_checks},
      {"measurement-model statistics", measurement_statistics},
      {"dead reckoning", dead_reckoning},
      {"filter convergence", filter_convergence},
      {"windowing", windowing},
      {"neural layer oracles", neural_layers},
      {"toy training", toy_training},
      {"schedules and lr finder", schedules},
      {"harness determinism", [&] { return harness_determinism(work); }},
      {"end-to-end smoke", [&] { return end_to_end(work); }},
  };

  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o{false, ""};
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %-30s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  const double total = seconds_since(t0);
  std::printf("%zu criteria, %d failed, %.1f s\n", criteria.size(), failed, total);
  return failed == 0 ? 0 : 1;
}
