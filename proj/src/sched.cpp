#include "attikit/sched.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

namespace attikit::sched {

namespace {

constexpr double kFlatSlope = 1e-12;

std::string lower_case(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void ScheduleSpec::validate() const {
  switch (kind) {
    case ScheduleKind::Constant:
      // lr = 0 is allowed here as a frozen schedule
      if (!(std::isfinite(lr) && lr >= 0.0)) throw std::invalid_argument("constant schedule: lr must be >= 0");
      break;
    case ScheduleKind::Exponential:
      if (!positive(lr)) throw std::invalid_argument("exponential schedule: lr must be positive");
      if (!positive(decay_rate)) throw std::invalid_argument("exponential schedule: decay_rate must be positive");
      if (!positive(decay_step)) throw std::invalid_argument("exponential schedule: decay_step must be positive");
      break;
    case ScheduleKind::Stepwise: {
      if (!positive(lr)) throw std::invalid_argument("stepwise schedule: lr must be positive");
      if (!std::is_sorted(boundaries.begin(), boundaries.end()) ||
          std::adjacent_find(boundaries.begin(), boundaries.end()) != boundaries.end()) {
        throw std::invalid_argument("stepwise schedule: boundaries must be strictly increasing");
      }
      if (!boundaries.empty() && boundaries.front() < 0) {
        throw std::invalid_argument("stepwise schedule: boundaries must be >= 0");
      }
      if (amount) {
        if (!(std::isfinite(*amount) && *amount >= 0.0)) throw std::invalid_argument("stepwise schedule: bad amount");
        if (!(lr - *amount * static_cast<double>(boundaries.size()) > 0.0)) {
          throw std::invalid_argument("stepwise schedule: lr would drop to <= 0");
        }
      } else if (!positive(factor)) {
        throw std::invalid_argument("stepwise schedule: factor must be positive");
      }
      break;
    }
    case ScheduleKind::Cyclical:
      if (!positive(lower) || !positive(upper)) throw std::invalid_argument("cyclical schedule: bounds must be positive");
      if (!(lower < upper)) throw std::invalid_argument("cyclical schedule: lower must be < upper");
      if (!positive(stepsize)) throw std::invalid_argument("cyclical schedule: stepsize must be positive");
      break;
  }
}

ScheduleSpec ScheduleSpec::constant(double lr) {
  ScheduleSpec s;
  s.kind = ScheduleKind::Constant;
  s.lr = lr;
  return s;
}

ScheduleSpec ScheduleSpec::exponential(double lr0, double decay_rate, double decay_step) {
  ScheduleSpec s;
  s.kind = ScheduleKind::Exponential;
  s.lr = lr0;
  s.decay_rate = decay_rate;
  s.decay_step = decay_step;
  return s;
}

ScheduleSpec ScheduleSpec::stepwise(double lr0, double factor, std::vector<long> boundaries) {
  ScheduleSpec s;
  s.kind = ScheduleKind::Stepwise;
  s.lr = lr0;
  s.factor = factor;
  s.boundaries = std::move(boundaries);
  return s;
}

ScheduleSpec ScheduleSpec::stepwise_amount(double lr0, double amount, std::vector<long> boundaries) {
  ScheduleSpec s = stepwise(lr0, 1.0, std::move(boundaries));
  s.amount = amount;
  return s;
}

ScheduleSpec ScheduleSpec::cyclical(double lower, double upper, double stepsize, CyclicalForm form) {
  ScheduleSpec s;
  s.kind = ScheduleKind::Cyclical;
  s.lower = lower;
  s.upper = upper;
  s.stepsize = stepsize;
  s.form = form;
  return s;
}

std::string_view kind_name(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Constant: return "constant";
    case ScheduleKind::Exponential: return "exponential";
    case ScheduleKind::Stepwise: return "stepwise";
    case ScheduleKind::Cyclical: return "cyclical";
  }
  return "?";
}

std::optional<ScheduleKind> parse_kind(std::string_view name) {
  const std::string n = lower_case(name);
  for (auto k : {ScheduleKind::Constant, ScheduleKind::Exponential, ScheduleKind::Stepwise, ScheduleKind::Cyclical}) {
    if (kind_name(k) == n) return k;
  }
  return std::nullopt;
}

std::optional<CyclicalForm> parse_form(std::string_view name) {
  const std::string n = lower_case(name);
  if (n == "as-paper") return CyclicalForm::AsPaper;
  if (n == "triangular") return CyclicalForm::Triangular;
  return std::nullopt;
}

double lr_at(const ScheduleSpec& spec, long step) {
  if (step < 0) throw std::invalid_argument("lr_at: step must be >= 0");
  spec.validate();
  const auto s = static_cast<double>(step);
  switch (spec.kind) {
    case ScheduleKind::Constant:
      return spec.lr;
    case ScheduleKind::Exponential:
      return spec.lr * std::pow(spec.decay_rate, s / spec.decay_step);
    case ScheduleKind::Stepwise: {
      double lr = spec.lr;
      for (long b : spec.boundaries) {
        if (step < b) break;
        lr = spec.amount ? lr - *spec.amount : lr * spec.factor;
      }
      return lr;
    }
    case ScheduleKind::Cyclical:
      if (spec.form == CyclicalForm::AsPaper) {
        return spec.lower / 2.0 + spec.upper / 2.0 * (1.0 + std::cos(s / spec.stepsize));
      } else {
        const double cycle = std::floor(1.0 + s / (2.0 * spec.stepsize));
        const double x = std::abs(s / spec.stepsize - 2.0 * cycle + 1.0);
        return spec.lower + (spec.upper - spec.lower) * std::max(0.0, 1.0 - x);
      }
  }
  return spec.lr;
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::invalid_argument("geometric_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g(static_cast<std::size_t>(n));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

LrFindResult select_lr(const std::vector<std::pair<double, double>>& trace) {
  LrFindResult r;
  r.trace = trace;
  std::size_t usable = 0;
  while (usable < trace.size() && std::isfinite(trace[usable].second)) ++usable;
  if (usable == 0) throw no_usable_lr("lr_find: every probe loss is non-finite");

  const auto n = usable;
  r.smoothed.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = std::min(n - 1, i + 1);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += trace[j].second;
    r.smoothed[i] = sum / static_cast<double>(hi - lo + 1);
  }

  r.slopes.assign(n, 0.0);
  if (n >= 2) {
    auto x = [&](std::size_t i) { return std::log(trace[i].first); };
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = std::min(n - 1, i + 1);
      r.slopes[i] = (r.smoothed[hi] - r.smoothed[lo]) / (x(hi) - x(lo));
    }
  }

  const auto best = std::min_element(r.slopes.begin(), r.slopes.end());
  if (*best < -kFlatSlope) {
    r.lr = trace[static_cast<std::size_t>(best - r.slopes.begin())].first;
    return r;
  }
  r.flat = true;
  r.lr = trace.front().first;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(r.slopes[i]) < kFlatSlope) {
      r.lr = trace[i].first;
      break;
    }
  }
  return r;
}

LrFindResult lr_find(const LrProbe& probe, const std::vector<double>& grid) {
  if (grid.size() < 4) throw std::invalid_argument("lr_find: grid needs at least 4 points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw std::invalid_argument("lr_find: grid must be positive and strictly increasing");
    }
  }
  std::vector<std::pair<double, double>> trace;
  trace.reserve(grid.size());
  for (double lr : grid) trace.emplace_back(lr, probe(lr));
  return select_lr(trace);
}

}  // namespace attikit::sched
