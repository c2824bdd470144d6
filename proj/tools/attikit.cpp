// attikit command-line driver.

#include "attikit/eval.hpp"
#include "attikit/losses.hpp"
#include "attikit/nn/model.hpp"
#include "attikit/sched.hpp"
#include "attikit/sim.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace attikit;

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Vector3d parse_axis(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  if (v.size() != 3) throw std::invalid_argument("axis needs three comma-separated values");
  return Vector3d(v[0], v[1], v[2]);
}

struct ModelChoice {
  std::string model{"b"};
  int units{4};  // micro-b only
  int dense{8};
};

nn::ModelGraph build_graph(const ModelChoice& m, int window) {
  if (m.model == "a") return nn::build_model_a(window);
  if (m.model == "b") return nn::build_model_b(window);
  if (m.model == "micro-b") {
    nn::ModelBOptions o;
    o.lstm_units = m.units;
    o.dense_units = m.dense;
    o.rate_units = m.dense;
    return nn::build_model_b(window, o);
  }
  throw std::invalid_argument("unknown model '" + m.model + "' (a, b, micro-b)");
}

// --- subcommands -------------------------------------------------------------

struct SweepArgs {
  std::string kind{"qip"};
  std::string axis{"1,0,0"};
  int steps{181};
  std::string out;
};

int run_sweep(const SweepArgs& a) {
  const auto kind = loss::parse_kind(a.kind);
  if (!kind) throw std::invalid_argument("unknown loss kind '" + a.kind + "'");
  std::string text = "angle_rad,loss\n";
  for (const auto& p : loss::loss_landscape(*kind, parse_axis(a.axis), a.steps)) {
    text += fmt17(p.angle) + "," + fmt17(p.loss) + "\n";
  }
  write_output(a.out, text);
  return 0;
}

struct SimulateArgs {
  std::string spec;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  const auto spec = sim::parse_spec(read_file(a.spec), sim::default_seed());
  data::save_trial(sim::simulate(spec), a.out);
  return 0;
}

struct EvaluateArgs {
  std::string manifest;
  std::vector<std::string> estimators;
  std::vector<std::string> gains;
  int window{200};
  int stride{10};
  std::string format{"csv"};
  std::string out;
  std::string boxplot_out;
  int threads{1};
};

int run_evaluate(const EvaluateArgs& a) {
  const auto format = eval::parse_format(a.format);
  if (!format) throw std::invalid_argument("unknown format '" + a.format + "'");
  const data::WindowSpec window{a.window, a.stride};
  window.validate();

  std::map<std::string, double> gains;
  for (const auto& g : a.gains) {
    const auto eq = g.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--gain expects key=value, got '" + g + "'");
    gains[g.substr(0, eq)] = std::stod(g.substr(eq + 1));
  }

  std::vector<std::shared_ptr<const eval::Estimator>> estimators;
  for (const auto& text : a.estimators) {
    auto ref = eval::parse_estimator(text);
    if (ref.kind != eval::EstimatorKind::DeadReckon && ref.kind != eval::EstimatorKind::ModelA &&
        ref.kind != eval::EstimatorKind::ModelB) {
      for (const auto& [k, v] : gains) ref.gains.try_emplace(k, v);
    }
    estimators.push_back(eval::make_estimator(ref, window));
  }

  eval::EvalOptions options;
  options.threads = a.threads;
  const auto report = eval::evaluate(data::load_manifest(a.manifest), estimators, options);
  for (const auto& r : report.rows) {
    if (r.status != eval::RowStatus::Ok) {
      std::cerr << "warning: " << r.trial << " / " << r.estimator << ": " << eval::status_name(r.status) << ": "
                << r.message << '\n';
    }
  }
  write_output(a.out, eval::render_report(report, *format));
  if (!a.boxplot_out.empty()) write_output(a.boxplot_out, eval::render_boxplot_csv(report));
  return report.any_failed() ? 2 : 0;
}

struct InferArgs {
  ModelChoice model{"a"};
  std::string weights;
  std::string trial;
  int window{200};
  int stride{10};
  std::string out;
};

int run_infer(const InferArgs& a) {
  const data::WindowSpec spec{a.window, a.stride};
  spec.validate();
  const auto graph = build_graph(a.model, a.window);
  const auto weights = nn::WeightStore::load(a.weights);
  nn::check_weights(graph, weights);
  const auto params = nn::to_parameters(weights);
  const auto trial = data::load_trial(a.trial);
  std::string text = "t,qw,qx,qy,qz\n";
  std::size_t degenerate = 0;
  for (const auto& w : data::extract_windows(trial, spec)) {
    const auto r = nn::forward(graph, params, w);
    degenerate += r.degenerate ? 1 : 0;
    text += fmt17(w.t_center);
    for (int i = 0; i < 4; ++i) text += "," + fmt17(r.q[i]);
    text += "\n";
  }
  if (degenerate) std::cerr << "warning: " << degenerate << " windows had a degenerate network output\n";
  write_output(a.out, text);
  return 0;
}

struct InitArgs {
  ModelChoice model{"a"};
  int window{200};
  double gain{1.0};
  std::string out;
};

int run_init(const InitArgs& a) {
  const auto graph = build_graph(a.model, a.window);
  nn::init_weights(graph, sim::default_seed(), a.gain).save(a.out);
  std::cerr << graph.parameter_count() << " parameters\n";
  return 0;
}

struct LrFindArgs {
  ModelChoice model{"micro-b"};
  std::string data;
  std::string loss{"qmea_nt"};
  int window{20};
  int stride{10};
  int max_windows{10};
  int probe_steps{5};
  double lo{1e-6};
  double hi{1e-1};
  int points{20};
  std::string out;
};

int run_lr_find(const LrFindArgs& a) {
  const auto kind = loss::parse_kind(a.loss);
  if (!kind) throw std::invalid_argument("unknown loss kind '" + a.loss + "'");
  const auto graph = build_graph(a.model, a.window);
  auto windows = data::extract_windows(data::load_trial(a.data), {a.window, a.stride});
  if (static_cast<int>(windows.size()) > a.max_windows) windows.resize(static_cast<std::size_t>(a.max_windows));
  const auto initial = nn::init_weights(graph, sim::default_seed());
  const auto probe = nn::make_lr_probe(graph, initial, std::move(windows), *kind, a.probe_steps);
  const auto result = sched::lr_find(probe, sched::geometric_grid(a.lo, a.hi, a.points));
  std::string text = "lr,loss\n";
  for (const auto& [lr, l] : result.trace) text += fmt17(lr) + "," + fmt17(l) + "\n";
  write_output(a.out, text);
  std::cerr << "chosen lr " << fmt17(result.lr) << (result.flat ? " (flat trace)" : "") << '\n';
  return 0;
}

struct ScheduleArgs {
  std::string kind{"cyclical"};
  double lr{1e-3};
  double decay_rate{0.5};
  double decay_step{10.0};
  double factor{0.5};
  std::optional<double> amount;
  std::vector<long> boundaries;
  double lower{1e-4};
  double upper{1e-2};
  double stepsize{10.0};
  std::string form{"as-paper"};
  long steps{100};
  std::string out;
};

int run_schedule(const ScheduleArgs& a) {
  const auto kind = sched::parse_kind(a.kind);
  if (!kind) throw std::invalid_argument("unknown schedule '" + a.kind + "'");
  const auto form = sched::parse_form(a.form);
  if (!form) throw std::invalid_argument("--clr-form must be as-paper or triangular");
  sched::ScheduleSpec spec;
  spec.kind = *kind;
  spec.lr = a.lr;
  spec.decay_rate = a.decay_rate;
  spec.decay_step = a.decay_step;
  spec.factor = a.factor;
  spec.amount = a.amount;
  spec.boundaries = a.boundaries;
  spec.lower = a.lower;
  spec.upper = a.upper;
  spec.stepsize = a.stepsize;
  spec.form = *form;
  spec.validate();
  std::string text = "step,lr\n";
  for (long k = 0; k < a.steps; ++k) text += std::to_string(k) + "," + fmt17(sched::lr_at(spec, k)) + "\n";
  write_output(a.out, text);
  return 0;
}

void add_model_options(CLI::App* cmd, ModelChoice& m) {
  cmd->add_option("--model", m.model, "a, b or micro-b")->capture_default_str();
  cmd->add_option("--units", m.units, "micro-b LSTM units")->capture_default_str();
  cmd->add_option("--dense", m.dense, "micro-b dense units")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attikit: inertial attitude estimation toolkit"};
  app.require_subcommand(1);

  auto* losses = app.add_subcommand("losses", "quaternion loss utilities");
  losses->require_subcommand(1);
  SweepArgs sweep;
  auto* sweep_cmd = losses->add_subcommand("sweep", "loss against rotation angle, pi down to 0");
  sweep_cmd->add_option("--kind", sweep.kind)->required();
  sweep_cmd->add_option("--axis", sweep.axis, "x,y,z")->capture_default_str();
  sweep_cmd->add_option("--steps", sweep.steps)->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out);

  SimulateArgs simulate;
  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic trial");
  sim_cmd->add_option("--spec", simulate.spec)->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--out", simulate.out)->required();

  EvaluateArgs evaluate;
  auto* eval_cmd = app.add_subcommand("evaluate", "score estimators over a manifest");
  eval_cmd->add_option("--manifest", evaluate.manifest)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--estimator", evaluate.estimators)->required();
  eval_cmd->add_option("--gain", evaluate.gains, "key=value filter override");
  eval_cmd->add_option("--window", evaluate.window)->capture_default_str();
  eval_cmd->add_option("--stride", evaluate.stride)->capture_default_str();
  eval_cmd->add_option("--format", evaluate.format, "csv, json or markdown")->capture_default_str();
  eval_cmd->add_option("--out", evaluate.out);
  eval_cmd->add_option("--boxplot-out", evaluate.boxplot_out);
  eval_cmd->add_option("--threads", evaluate.threads)->capture_default_str();

  InferArgs infer;
  auto* infer_cmd = app.add_subcommand("infer", "run a network over a trial");
  add_model_options(infer_cmd, infer.model);
  infer_cmd->add_option("--weights", infer.weights)->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--trial", infer.trial)->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--window", infer.window)->capture_default_str();
  infer_cmd->add_option("--stride", infer.stride)->capture_default_str();
  infer_cmd->add_option("--out", infer.out);

  InitArgs init;
  auto* init_cmd = app.add_subcommand("init-weights", "write randomly initialized weights");
  add_model_options(init_cmd, init.model);
  init_cmd->add_option("--window", init.window)->capture_default_str();
  init_cmd->add_option("--gain", init.gain)->capture_default_str();
  init_cmd->add_option("--out", init.out)->required();

  LrFindArgs lr;
  auto* lr_cmd = app.add_subcommand("lr-find", "learning-rate sweep on a micro model");
  add_model_options(lr_cmd, lr.model);
  lr_cmd->add_option("--data", lr.data, "trial csv with ground truth")->required()->check(CLI::ExistingFile);
  lr_cmd->add_option("--loss", lr.loss)->capture_default_str();
  lr_cmd->add_option("--window", lr.window)->capture_default_str();
  lr_cmd->add_option("--stride", lr.stride)->capture_default_str();
  lr_cmd->add_option("--max-windows", lr.max_windows)->capture_default_str();
  lr_cmd->add_option("--probe-steps", lr.probe_steps)->capture_default_str();
  lr_cmd->add_option("--lr-min", lr.lo)->capture_default_str();
  lr_cmd->add_option("--lr-max", lr.hi)->capture_default_str();
  lr_cmd->add_option("--points", lr.points)->capture_default_str();
  lr_cmd->add_option("--out", lr.out);

  ScheduleArgs schedule;
  auto* sched_cmd = app.add_subcommand("schedule", "tabulate a learning-rate schedule");
  sched_cmd->add_option("--kind", schedule.kind, "constant, exponential, stepwise or cyclical")->capture_default_str();
  sched_cmd->add_option("--lr", schedule.lr)->capture_default_str();
  sched_cmd->add_option("--decay-rate", schedule.decay_rate)->capture_default_str();
  sched_cmd->add_option("--decay-step", schedule.decay_step)->capture_default_str();
  sched_cmd->add_option("--factor", schedule.factor)->capture_default_str();
  sched_cmd->add_option("--amount", schedule.amount);
  sched_cmd->add_option("--boundaries", schedule.boundaries);
  sched_cmd->add_option("--lower", schedule.lower)->capture_default_str();
  sched_cmd->add_option("--upper", schedule.upper)->capture_default_str();
  sched_cmd->add_option("--stepsize", schedule.stepsize)->capture_default_str();
  sched_cmd->add_option("--clr-form", schedule.form, "as-paper or triangular")->capture_default_str();
  sched_cmd->add_option("--steps", schedule.steps)->capture_default_str();
  sched_cmd->add_option("--out", schedule.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (sweep_cmd->parsed()) return run_sweep(sweep);
    if (sim_cmd->parsed()) return run_simulate(simulate);
    if (eval_cmd->parsed()) return run_evaluate(evaluate);
    if (infer_cmd->parsed()) return run_infer(infer);
    if (init_cmd->parsed()) return run_init(init);
    if (lr_cmd->parsed()) return run_lr_find(lr);
    if (sched_cmd->parsed()) return run_schedule(schedule);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
