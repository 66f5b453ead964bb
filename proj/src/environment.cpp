#include "qgd/environment.hpp"

#include <cmath>
#include <limits>

#include "qgd/error.hpp"

namespace qgd {

QgdEnvironment::QgdEnvironment(const ObjectiveFn& objective, EnvConfig cfg)
    : objective_(objective), cfg_(std::move(cfg)) {
  if (cfg_.window < 1) throw ConfigError("window M must be >= 1");
  if (cfg_.horizon <= cfg_.window) throw ConfigError("horizon T must exceed window M");
  if (!(cfg_.alpha_c > 0.0)) throw ConfigError("alpha_c must be positive");
  cfg_.scaling.validate();
  if (cfg_.alpha_bounds) {
    const auto [lo, hi] = *cfg_.alpha_bounds;
    if (!(lo < cfg_.alpha_c && cfg_.alpha_c < hi)) throw ConfigError("alpha bounds must bracket alpha_c");
  }
}

LossGrad QgdEnvironment::evaluate(std::span<const double> x) {
  ++evaluations_;
  try {
    auto lg = objective_.evaluate_with_gradient(x);
    if (!std::isfinite(lg.loss)) lg.loss = std::numeric_limits<double>::infinity();
    return lg;
  } catch (const NumericError&) {
    return LossGrad{std::numeric_limits<double>::infinity(), ParamVector(x.size(), 0.0)};
  }
}

StepStatus QgdEnvironment::reset(std::span<const double> x1) {
  if (x1.size() != objective_.num_params()) throw ConfigError("x_1 does not match the objective's parameter count");
  history_ = HistoryWindow{};
  history_.capacity = cfg_.window;
  history_.t = 1;
  history_.alpha = cfg_.alpha_c;
  evaluations_ = 0;
  accepted_ = 0;
  trace_.clear();

  x_cand_.assign(x1.begin(), x1.end());
  auto lg = evaluate(x_cand_);
  trace_.push_back(lg.loss);
  for (std::size_t k = 1; k < cfg_.window; ++k) {
    if (!std::isfinite(lg.loss)) return StepStatus::diverged;
    Vector d(lg.grad.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = -lg.grad[i];
    update_window(history_, lg.loss, d);
    for (std::size_t i = 0; i < x_cand_.size(); ++i) x_cand_[i] += cfg_.alpha_c * d[i];
    lg = evaluate(x_cand_);
    trace_.push_back(lg.loss);
  }
  f_cand_ = lg.loss;
  g_cand_ = std::move(lg.grad);
  x_bar_ = x_cand_;
  f_bar_ = f_cand_;
  g_bar_ = g_cand_;
  dir_.resize(g_bar_.size());
  for (std::size_t i = 0; i < dir_.size(); ++i) dir_[i] = -g_bar_[i];
  return std::isfinite(f_cand_) ? StepStatus::ok : StepStatus::diverged;
}

StateVector QgdEnvironment::state() const { return scale_features(raw_state(), cfg_.scaling); }

StateVector QgdEnvironment::raw_state() const {
  return raw_features(history_, f_cand_, g_bar_, dir_, cfg_.scaling);
}

double QgdEnvironment::next_alpha(Action a) const {
  switch (a) {
    case Action::half: return 0.5 * history_.alpha;
    case Action::double_rate:
      if (cfg_.variant != Variant::v2) throw CapabilityError("action 'double' is only available in v2");
      return 2.0 * history_.alpha;
    case Action::accept: return cfg_.variant == Variant::v1 ? cfg_.alpha_c : history_.alpha;
  }
  throw CapabilityError("unknown action");
}

double QgdEnvironment::peek_objective(Action a) {
  const double alpha = next_alpha(a);
  ParamVector x(x_bar_.size());
  if (a == Action::accept) {
    // The new accepted iterate is the current candidate; direction changes.
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x_cand_[i] - alpha * g_cand_[i];
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x_bar_[i] + alpha * dir_[i];
  }
  ++evaluations_;
  try {
    const double f = objective_.evaluate(x);
    return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
  } catch (const NumericError&) {
    return std::numeric_limits<double>::infinity();
  }
}

StepStatus QgdEnvironment::step(Action a) {
  const double alpha = next_alpha(a);
  update_window(history_, f_cand_, dir_);
  if (a == Action::accept) {
    x_bar_ = x_cand_;
    f_bar_ = f_cand_;
    g_bar_ = g_cand_;
    for (std::size_t i = 0; i < dir_.size(); ++i) dir_[i] = -g_bar_[i];
    ++accepted_;
  }
  history_.alpha = alpha;
  if (cfg_.alpha_bounds && (alpha < cfg_.alpha_bounds->first || alpha > cfg_.alpha_bounds->second))
    return StepStatus::out_of_bounds;
  for (std::size_t i = 0; i < x_cand_.size(); ++i) x_cand_[i] = x_bar_[i] + alpha * dir_[i];
  auto lg = evaluate(x_cand_);
  f_cand_ = lg.loss;
  g_cand_ = std::move(lg.grad);
  trace_.push_back(f_cand_);
  return std::isfinite(f_cand_) ? StepStatus::ok : StepStatus::diverged;
}

}  // namespace qgd
