#pragma once

// Benchmark runner: estimators over a trial manifest, error statistics in
// degrees, boxplot summaries and report rendering.

#include "attikit/dataset.hpp"
#include "attikit/filters.hpp"
#include "attikit/nn/model.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace attikit::eval {

enum class EstimatorKind { DeadReckon, CF, Madgwick, Mahony, EKF, ModelA, ModelB };

std::string_view kind_name(EstimatorKind kind);     // cli spelling: dead-reckon, cf, ..., model-a
std::string_view display_name(EstimatorKind kind);  // table header: Dead Reckoning, CF, ..., Model A
std::optional<EstimatorKind> parse_kind(std::string_view name);

struct EstimatorRef {
  EstimatorKind kind{EstimatorKind::DeadReckon};
  std::optional<std::filesystem::path> weights;  // model-a / model-b
  std::map<std::string, double> gains;           // filter overrides

  std::string label() const;
};

/// "cf", "mahony:kp=2,ki=0.1", "model-a:weights=w.json".
EstimatorRef parse_estimator(std::string_view text);

/// One attitude estimate, tied to a trial sample index.
struct Estimate {
  std::size_t index;
  Quaterniond q;
};

class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual std::string name() const = 0;
  /// Must be safe to call concurrently on different trials.
  virtual std::vector<Estimate> estimate(const data::TrialFile& trial) const = 0;
};

/// Validates configs and loads weights; throws on a bad reference.
std::unique_ptr<Estimator> make_estimator(const EstimatorRef& ref, const data::WindowSpec& window);

// ---------------------------------------------------------------------------

struct BoxplotStats {
  double median{0.0};
  double q1{0.0};
  double q3{0.0};
  double whisker_lo{0.0};
  double whisker_hi{0.0};
  std::size_t outlier_count{0};
};

/// Quartiles by linear interpolation between order statistics (position
/// p*(n-1), the inclusive method); whiskers at the most extreme points
/// within 1.5 IQR of the box. Throws on empty input.
BoxplotStats boxplot_stats(std::span<const double> values);

enum class RowStatus { Ok, Failed, Skipped };
std::string_view status_name(RowStatus s);

struct TrialRow {
  std::string trial;
  std::string estimator;
  RowStatus status{RowStatus::Ok};
  std::string message;
  double rmse_deg{0.0};
  double mean_deg{0.0};
  double median_deg{0.0};
  double max_deg{0.0};
  std::size_t n_estimates{0};
  std::vector<double> errors_deg;  // per estimate, kept for boxplots
};

struct AggregateRow {
  std::string estimator;
  double rmse_deg{0.0};  // unweighted mean over ok trials; NaN when there are none
  double mean_deg{0.0};
  double median_deg{0.0};
  double max_deg{0.0};
  std::size_t trials{0};
};

struct EvalReport {
  std::vector<std::string> estimators;  // column order
  std::vector<std::string> trials;      // row order
  std::vector<TrialRow> rows;           // trial-major, estimator-minor
  std::vector<AggregateRow> aggregates;
  std::vector<std::pair<std::string, BoxplotStats>> boxplots;  // pooled errors per estimator

  const TrialRow* find(const std::string& trial, const std::string& estimator) const;
  bool any_failed() const;
};

/// Per-trial statistics from per-estimate errors in degrees.
TrialRow score(const std::string& trial, const std::string& estimator, std::vector<double> errors_deg);

struct EvalOptions {
  int threads{1};
  data::LoadOptions load{};
};

EvalReport evaluate(const std::vector<data::ManifestEntry>& manifest,
                    const std::vector<std::shared_ptr<const Estimator>>& estimators, const EvalOptions& options = {});

/// Fills aggregates and boxplots from rows.
void summarize(EvalReport& report);

enum class ReportFormat { Csv, Json, Markdown };
std::optional<ReportFormat> parse_format(std::string_view name);

/// csv and json at full precision, markdown at 2 decimals with an "Average All" row.
std::string render_report(const EvalReport& report, ReportFormat format);
std::string render_boxplot_csv(const EvalReport& report);

}  // namespace attikit::eval
