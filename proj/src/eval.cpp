#include "attikit/eval.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

namespace attikit::eval {

namespace {

using json = nlohmann::json;

std::string lower_case(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double v) { return std::isfinite(v) ? fmt("%.17g", v) : ""; }

json json_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

bool is_filter(EstimatorKind k) {
  return k == EstimatorKind::CF || k == EstimatorKind::Madgwick || k == EstimatorKind::Mahony ||
         k == EstimatorKind::EKF;
}

filters::FilterKind filter_kind(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Madgwick: return filters::FilterKind::Madgwick;
    case EstimatorKind::Mahony: return filters::FilterKind::Mahony;
    case EstimatorKind::EKF: return filters::FilterKind::EKF;
    default: return filters::FilterKind::CF;
  }
}

class DeadReckonEstimator final : public Estimator {
 public:
  explicit DeadReckonEstimator(std::string label) : label_(std::move(label)) {}
  std::string name() const override { return label_; }
  std::vector<Estimate> estimate(const data::TrialFile& trial) const override {
    if (trial.samples.empty() || !trial.samples.front().gt) {
      throw std::invalid_argument("dead reckoning needs ground truth at the first sample");
    }
    const auto qs = imu::dead_reckon(trial.samples, *trial.samples.front().gt);
    std::vector<Estimate> out;
    out.reserve(qs.size());
    for (std::size_t i = 0; i < qs.size(); ++i) out.push_back({i, qs[i]});
    return out;
  }

 private:
  std::string label_;
};

class FilterEstimator final : public Estimator {
 public:
  FilterEstimator(std::string label, filters::FilterConfig config) : label_(std::move(label)), config_(config) {
    config_.validate();
  }
  std::string name() const override { return label_; }
  std::vector<Estimate> estimate(const data::TrialFile& trial) const override {
    const auto qs = filters::run(config_, trial.samples);
    std::vector<Estimate> out;
    out.reserve(qs.size());
    for (std::size_t i = 0; i < qs.size(); ++i) out.push_back({i, qs[i]});
    return out;
  }

 private:
  std::string label_;
  filters::FilterConfig config_;
};

class ModelEstimator final : public Estimator {
 public:
  ModelEstimator(std::string label, nn::ModelGraph graph, const nn::WeightStore& weights, data::WindowSpec window)
      : label_(std::move(label)), graph_(std::move(graph)), window_(window) {
    nn::check_weights(graph_, weights);
    params_ = nn::to_parameters(weights);
  }
  std::string name() const override { return label_; }
  std::vector<Estimate> estimate(const data::TrialFile& trial) const override {
    std::vector<Estimate> out;
    for (const auto& w : data::extract_windows(trial, window_)) {
      out.push_back({w.center, nn::forward(graph_, params_, w).q});
    }
    return out;
  }

 private:
  std::string label_;
  nn::ModelGraph graph_;
  nn::ParameterSet params_;
  data::WindowSpec window_;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

TrialRow status_row(const std::string& trial, const std::string& estimator, RowStatus status, std::string message) {
  TrialRow r;
  r.trial = trial;
  r.estimator = estimator;
  r.status = status;
  r.message = std::move(message);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.rmse_deg = r.mean_deg = r.median_deg = r.max_deg = nan;
  return r;
}

std::vector<TrialRow> evaluate_trial(const data::ManifestEntry& entry,
                                     const std::vector<std::shared_ptr<const Estimator>>& estimators,
                                     const EvalOptions& options, std::string& trial_name) {
  trial_name = entry.path.stem().string();
  std::vector<TrialRow> rows;
  data::TrialFile trial;
  try {
    trial = data::load_trial(entry.path, entry.meta_path, options.load);
  } catch (const std::exception& e) {
    for (const auto& est : estimators) rows.push_back(status_row(trial_name, est->name(), RowStatus::Failed, e.what()));
    return rows;
  }
  if (!trial.meta.name.empty()) trial_name = trial.meta.name;
  if (!trial.has_ground_truth) {
    for (const auto& est : estimators) {
      rows.push_back(status_row(trial_name, est->name(), RowStatus::Skipped, "trial has no ground truth"));
    }
    return rows;
  }
  for (const auto& est : estimators) {
    try {
      const auto estimates = est->estimate(trial);
      if (estimates.empty()) throw std::runtime_error("estimator produced no estimates");
      std::vector<double> errors;
      errors.reserve(estimates.size());
      for (const auto& e : estimates) {
        if (e.index >= trial.samples.size()) throw std::runtime_error("estimate index out of range");
        errors.push_back(rad2deg(error_angle(*trial.samples[e.index].gt, Quaterniond(e.q.normalized()))));
      }
      rows.push_back(score(trial_name, est->name(), std::move(errors)));
    } catch (const std::exception& e) {
      rows.push_back(status_row(trial_name, est->name(), RowStatus::Failed, e.what()));
    }
  }
  return rows;
}

std::string render_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "trial,estimator,status,rmse_deg,mean_deg,median_deg,max_deg,n_estimates,message\n";
  for (const auto& r : report.rows) {
    out << csv_field(r.trial) << ',' << csv_field(r.estimator) << ',' << status_name(r.status) << ','
        << csv_number(r.rmse_deg) << ',' << csv_number(r.mean_deg) << ',' << csv_number(r.median_deg) << ','
        << csv_number(r.max_deg) << ',' << r.n_estimates << ',' << csv_field(r.message) << '\n';
  }
  for (const auto& a : report.aggregates) {
    out << "Average All," << csv_field(a.estimator) << ",aggregate," << csv_number(a.rmse_deg) << ','
        << csv_number(a.mean_deg) << ',' << csv_number(a.median_deg) << ',' << csv_number(a.max_deg) << ','
        << a.trials << ",\n";
  }
  return out.str();
}

std::string render_json(const EvalReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"trial", r.trial},
                    {"estimator", r.estimator},
                    {"status", status_name(r.status)},
                    {"message", r.message},
                    {"rmse_deg", json_number(r.rmse_deg)},
                    {"mean_deg", json_number(r.mean_deg)},
                    {"median_deg", json_number(r.median_deg)},
                    {"max_deg", json_number(r.max_deg)},
                    {"n_estimates", r.n_estimates}});
  }
  json aggregates = json::array();
  for (const auto& a : report.aggregates) {
    aggregates.push_back({{"estimator", a.estimator},
                          {"rmse_deg", json_number(a.rmse_deg)},
                          {"mean_deg", json_number(a.mean_deg)},
                          {"median_deg", json_number(a.median_deg)},
                          {"max_deg", json_number(a.max_deg)},
                          {"trials", a.trials}});
  }
  json boxplots = json::array();
  for (const auto& [name, b] : report.boxplots) {
    boxplots.push_back({{"estimator", name},
                        {"median", b.median},
                        {"q1", b.q1},
                        {"q3", b.q3},
                        {"whisker_lo", b.whisker_lo},
                        {"whisker_hi", b.whisker_hi},
                        {"outlier_count", b.outlier_count}});
  }
  json j = {{"estimators", report.estimators},
            {"trials", report.trials},
            {"rows", rows},
            {"aggregates", aggregates},
            {"boxplots", boxplots}};
  return j.dump(2) + "\n";
}

std::string markdown_cell(const TrialRow* r) {
  if (!r) return "";
  switch (r->status) {
    case RowStatus::Ok: return fmt("%.2f", r->rmse_deg);
    case RowStatus::Failed: return "failed";
    case RowStatus::Skipped: return "n/a";
  }
  return "";
}

std::string render_markdown(const EvalReport& report) {
  std::ostringstream out;
  out << "| Trial |";
  for (const auto& e : report.estimators) out << ' ' << e << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < report.estimators.size(); ++i) out << "---:|";
  out << '\n';
  if (report.estimators.empty()) return out.str();
  for (const auto& t : report.trials) {
    out << "| " << t << " |";
    for (const auto& e : report.estimators) out << ' ' << markdown_cell(report.find(t, e)) << " |";
    out << '\n';
  }
  out << "| Average All |";
  for (const auto& e : report.estimators) {
    const auto it = std::find_if(report.aggregates.begin(), report.aggregates.end(),
                                 [&](const AggregateRow& a) { return a.estimator == e; });
    const bool have = it != report.aggregates.end() && std::isfinite(it->rmse_deg);
    out << ' ' << (have ? fmt("%.2f", it->rmse_deg) : std::string("n/a")) << " |";
  }
  out << '\n';
  return out.str();
}

}  // namespace

std::string_view kind_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::DeadReckon: return "dead-reckon";
    case EstimatorKind::CF: return "cf";
    case EstimatorKind::Madgwick: return "madgwick";
    case EstimatorKind::Mahony: return "mahony";
    case EstimatorKind::EKF: return "ekf";
    case EstimatorKind::ModelA: return "model-a";
    case EstimatorKind::ModelB: return "model-b";
  }
  return "?";
}

std::string_view display_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::DeadReckon: return "Dead Reckoning";
    case EstimatorKind::CF: return "CF";
    case EstimatorKind::Madgwick: return "Madgwick";
    case EstimatorKind::Mahony: return "Mahony";
    case EstimatorKind::EKF: return "EKF";
    case EstimatorKind::ModelA: return "Model A";
    case EstimatorKind::ModelB: return "Model B";
  }
  return "?";
}

std::optional<EstimatorKind> parse_kind(std::string_view name) {
  const std::string n = lower_case(name);
  for (auto k : {EstimatorKind::DeadReckon, EstimatorKind::CF, EstimatorKind::Madgwick, EstimatorKind::Mahony,
                 EstimatorKind::EKF, EstimatorKind::ModelA, EstimatorKind::ModelB}) {
    if (kind_name(k) == n) return k;
  }
  return std::nullopt;
}

std::string EstimatorRef::label() const {
  std::string s(display_name(kind));
  if (gains.empty()) return s;
  s += " (";
  bool first = true;
  for (const auto& [k, v] : gains) {
    s += (first ? "" : " ") + k + "=" + fmt("%g", v);
    first = false;
  }
  return s + ")";
}

EstimatorRef parse_estimator(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const auto kind = parse_kind(head);
  if (!kind) throw std::invalid_argument("unknown estimator '" + std::string(head) + "'");
  EstimatorRef ref;
  ref.kind = *kind;
  if (colon == std::string_view::npos) return ref;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("estimator option '" + std::string(item) + "' needs key=value");
    const std::string key(item.substr(0, eq));
    const std::string value(item.substr(eq + 1));
    if (key == "weights") {
      ref.weights = value;
    } else {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != value.size() || value.empty()) throw std::invalid_argument("estimator option '" + key + "': not a number");
      ref.gains[key] = v;
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return ref;
}

std::unique_ptr<Estimator> make_estimator(const EstimatorRef& ref, const data::WindowSpec& window) {
  const std::string label = ref.label();
  if (ref.kind == EstimatorKind::DeadReckon) {
    if (!ref.gains.empty() || ref.weights) throw std::invalid_argument("dead-reckon takes no options");
    return std::make_unique<DeadReckonEstimator>(label);
  }
  if (is_filter(ref.kind)) {
    if (ref.weights) throw std::invalid_argument(std::string(kind_name(ref.kind)) + " takes no weights");
    auto config = filters::FilterConfig::defaults(filter_kind(ref.kind));
    for (const auto& [k, v] : ref.gains) config.set_gain(k, v);
    return std::make_unique<FilterEstimator>(label, config);
  }
  if (!ref.weights) throw std::invalid_argument(std::string(kind_name(ref.kind)) + " needs weights=<file>");
  if (!ref.gains.empty()) throw std::invalid_argument(std::string(kind_name(ref.kind)) + " takes no gains");
  window.validate();
  auto graph = ref.kind == EstimatorKind::ModelA ? nn::build_model_a(window.length) : nn::build_model_b(window.length);
  return std::make_unique<ModelEstimator>(label, std::move(graph), nn::WeightStore::load(*ref.weights), window);
}

// ---------------------------------------------------------------------------

BoxplotStats boxplot_stats(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("boxplot_stats: empty input");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  BoxplotStats b;
  b.median = sorted_quantile(v, 0.5);
  b.q1 = sorted_quantile(v, 0.25);
  b.q3 = sorted_quantile(v, 0.75);
  const double reach = 1.5 * (b.q3 - b.q1);
  const double lo = b.q1 - reach;
  const double hi = b.q3 + reach;
  b.whisker_lo = *std::lower_bound(v.begin(), v.end(), lo);
  b.whisker_hi = *std::prev(std::upper_bound(v.begin(), v.end(), hi));
  for (double x : v) {
    if (x < lo || x > hi) ++b.outlier_count;
  }
  return b;
}

std::string_view status_name(RowStatus s) {
  switch (s) {
    case RowStatus::Ok: return "ok";
    case RowStatus::Failed: return "failed";
    case RowStatus::Skipped: return "skipped";
  }
  return "?";
}

const TrialRow* EvalReport::find(const std::string& trial, const std::string& estimator) const {
  for (const auto& r : rows) {
    if (r.trial == trial && r.estimator == estimator) return &r;
  }
  return nullptr;
}

bool EvalReport::any_failed() const {
  return std::any_of(rows.begin(), rows.end(), [](const TrialRow& r) { return r.status == RowStatus::Failed; });
}

TrialRow score(const std::string& trial, const std::string& estimator, std::vector<double> errors_deg) {
  if (errors_deg.empty()) throw std::invalid_argument("score: no estimates");
  TrialRow r;
  r.trial = trial;
  r.estimator = estimator;
  r.n_estimates = errors_deg.size();
  double sq = 0.0;
  for (double e : errors_deg) sq += e * e;
  r.rmse_deg = std::sqrt(sq / static_cast<double>(errors_deg.size()));
  r.mean_deg = mean_of(errors_deg);
  r.max_deg = *std::max_element(errors_deg.begin(), errors_deg.end());
  std::vector<double> sorted = errors_deg;
  std::sort(sorted.begin(), sorted.end());
  r.median_deg = sorted_quantile(sorted, 0.5);
  r.errors_deg = std::move(errors_deg);
  return r;
}

void summarize(EvalReport& report) {
  report.aggregates.clear();
  report.boxplots.clear();
  for (const auto& e : report.estimators) {
    AggregateRow a;
    a.estimator = e;
    std::vector<double> pooled;
    double rmse = 0.0, mean = 0.0, median = 0.0, max = 0.0;
    for (const auto& r : report.rows) {
      if (r.estimator != e || r.status != RowStatus::Ok) continue;
      rmse += r.rmse_deg;
      mean += r.mean_deg;
      median += r.median_deg;
      max += r.max_deg;
      ++a.trials;
      pooled.insert(pooled.end(), r.errors_deg.begin(), r.errors_deg.end());
    }
    const double n = static_cast<double>(a.trials);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    a.rmse_deg = a.trials ? rmse / n : nan;
    a.mean_deg = a.trials ? mean / n : nan;
    a.median_deg = a.trials ? median / n : nan;
    a.max_deg = a.trials ? max / n : nan;
    report.aggregates.push_back(a);
    if (!pooled.empty()) report.boxplots.emplace_back(e, boxplot_stats(pooled));
  }
}

EvalReport evaluate(const std::vector<data::ManifestEntry>& manifest,
                    const std::vector<std::shared_ptr<const Estimator>>& estimators, const EvalOptions& options) {
  EvalReport report;
  for (const auto& e : estimators) {
    const std::string name = e->name();
    if (std::find(report.estimators.begin(), report.estimators.end(), name) != report.estimators.end()) {
      throw std::invalid_argument("duplicate estimator '" + name + "'");
    }
    report.estimators.push_back(name);
  }

  std::vector<std::vector<TrialRow>> per_trial(manifest.size());
  std::vector<std::string> names(manifest.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < manifest.size(); i = next++) {
      per_trial[i] = evaluate_trial(manifest[i], estimators, options, names[i]);
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, options.threads));
  if (threads == 1 || manifest.size() < 2) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, manifest.size()); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < manifest.size(); ++i) {
    report.trials.push_back(names[i]);
    for (auto& r : per_trial[i]) report.rows.push_back(std::move(r));
  }
  summarize(report);
  return report;
}

std::optional<ReportFormat> parse_format(std::string_view name) {
  const std::string n = lower_case(name);
  if (n == "csv") return ReportFormat::Csv;
  if (n == "json") return ReportFormat::Json;
  if (n == "markdown" || n == "md") return ReportFormat::Markdown;
  return std::nullopt;
}

std::string render_report(const EvalReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: return render_csv(report);
    case ReportFormat::Json: return render_json(report);
    case ReportFormat::Markdown: return render_markdown(report);
  }
  return {};
}

std::string render_boxplot_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "estimator,median,q1,q3,whisker_lo,whisker_hi,outlier_count\n";
  for (const auto& [name, b] : report.boxplots) {
    out << csv_field(name) << ',' << csv_number(b.median) << ',' << csv_number(b.q1) << ',' << csv_number(b.q3) << ','
        << csv_number(b.whisker_lo) << ',' << csv_number(b.whisker_hi) << ',' << b.outlier_count << '\n';
  }
  return out.str();
}

}  // namespace attikit::eval
