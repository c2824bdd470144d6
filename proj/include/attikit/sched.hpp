#pragma once

// Learning-rate schedules and the learning-rate finder.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

namespace attikit::sched {

enum class ScheduleKind { Constant, Exponential, Stepwise, Cyclical };

/// as-paper: lower/2 + upper/2 * (1 + cos(step / stepsize)), which peaks at
/// lower/2 + upper. triangular: linear ramps between lower and upper with
/// half-period stepsize.
enum class CyclicalForm { AsPaper, Triangular };

struct ScheduleSpec {
  ScheduleKind kind{ScheduleKind::Constant};
  double lr{1e-3};  // constant value, or initial lr for exponential / stepwise

  double decay_rate{0.5};
  double decay_step{1.0};

  // stepwise: at every boundary passed, lr *= factor, or lr -= amount when set
  double factor{0.5};
  std::optional<double> amount;
  std::vector<long> boundaries;

  double lower{1e-4};
  double upper{1e-2};
  double stepsize{1.0};
  CyclicalForm form{CyclicalForm::AsPaper};

  void validate() const;

  static ScheduleSpec constant(double lr);
  static ScheduleSpec exponential(double lr0, double decay_rate, double decay_step);
  static ScheduleSpec stepwise(double lr0, double factor, std::vector<long> boundaries);
  static ScheduleSpec stepwise_amount(double lr0, double amount, std::vector<long> boundaries);
  static ScheduleSpec cyclical(double lower, double upper, double stepsize, CyclicalForm form = CyclicalForm::AsPaper);
};

std::string_view kind_name(ScheduleKind kind);
std::optional<ScheduleKind> parse_kind(std::string_view name);
std::optional<CyclicalForm> parse_form(std::string_view name);

/// Throws std::invalid_argument for step < 0 or an invalid spec.
double lr_at(const ScheduleSpec& spec, long step);

// ---------------------------------------------------------------------------
// LR finder

class no_usable_lr : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loss after a short training probe at the given lr, from a fixed snapshot.
using LrProbe = std::function<double(double lr)>;

/// n points geometric from lo to hi inclusive.
std::vector<double> geometric_grid(double lo = 1e-6, double hi = 1e-1, int n = 20);

struct LrFindResult {
  double lr{0.0};
  bool flat{false};
  std::vector<std::pair<double, double>> trace;  // (lr, loss) over the whole grid, as probed
  std::vector<double> smoothed;                   // usable prefix only
  std::vector<double> slopes;                     // d(smoothed)/d(log lr), usable prefix
};

/// Analyses a probed trace. Points from the first non-finite loss on are
/// excluded; the rest is smoothed with a 3-point moving average (2 points at
/// the ends) and differentiated against log(lr), central in the interior and
/// one-sided at the ends. The lr with the most negative slope wins. When no
/// slope is below -1e-12 the trace is flat: the smallest lr whose |slope| is
/// below 1e-12 is returned (the first usable lr if none) with flat set.
LrFindResult select_lr(const std::vector<std::pair<double, double>>& trace);

/// Probes every grid point (ascending, >= 4 points) then select_lr.
LrFindResult lr_find(const LrProbe& probe, const std::vector<double>& grid = geometric_grid());

}  // namespace attikit::sched
