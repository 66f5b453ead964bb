#include "qgd/descent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include "qgd/environment.hpp"
#include "qgd/error.hpp"
#include "qgd/kernels.hpp"

namespace qgd {

const char* step_kind_name(StepKind k) noexcept {
  switch (k) {
    case StepKind::start: return "start";
    case StepKind::warmup: return "warmup";
    case StepKind::half: return "half";
    case StepKind::double_rate: return "double";
    case StepKind::accept: return "accept";
    case StepKind::none: return "none";
  }
  return "?";
}

namespace {

StepKind kind_of(Action a) {
  switch (a) {
    case Action::half: return StepKind::half;
    case Action::double_rate: return StepKind::double_rate;
    case Action::accept: return StepKind::accept;
  }
  return StepKind::none;
}

StepKind parse_kind(const std::string& s, std::size_t line) {
  for (auto k : {StepKind::start, StepKind::warmup, StepKind::half, StepKind::double_rate, StepKind::accept,
                 StepKind::none})
    if (s == step_kind_name(k)) return k;
  throw ParseError("unknown action '" + s + "'", line);
}

void count(OptRunTrace& tr, StepKind k) {
  if (k == StepKind::half) ++tr.halves;
  if (k == StepKind::double_rate) ++tr.doubles;
  if (k == StepKind::accept) ++tr.accepts;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double OptRunTrace::halving_frequency() const {
  const auto decisions = halves + doubles + accepts;
  return decisions == 0 ? 0.0 : static_cast<double>(halves) / static_cast<double>(decisions);
}

bool sufficient_decrease_check(double f_new, double history_max, double alpha, double g_dot_d, double c) {
  return f_new <= history_max + c * alpha * g_dot_d;
}

OptRunTrace qgd_run(const ObjectiveFn& objective, const DqnModel& model, std::span<const double> x1,
                    std::size_t horizon, std::size_t window, const QgdRunOptions& options) {
  EnvConfig ec;
  ec.variant = model.actions.variant();
  ec.alpha_c = model.alpha_c;
  ec.window = window;
  ec.horizon = horizon;
  ec.scaling = model.scaling;
  ec.scaling[Feature::eval_count].min = static_cast<double>(window);
  ec.scaling[Feature::eval_count].max = static_cast<double>(horizon);
  QgdEnvironment env(objective, ec);

  OptRunTrace tr;
  tr.optimizer = std::string("qgd-") + variant_name(model.actions.variant());
  const StepStatus start = env.reset(x1);
  const auto& warm = env.objective_trace();
  for (std::size_t i = 0; i + 1 < warm.size(); ++i)
    tr.steps.push_back({i + 1, warm[i], model.alpha_c, i == 0 ? StepKind::start : StepKind::warmup, 0, kNaN, kNaN});
  if (start != StepStatus::ok) {
    tr.diverged = true;
    tr.final_f = env.f_candidate();
    tr.final_x = env.candidate();
    tr.evaluations = env.evaluations();
    return tr;
  }

  for (std::size_t t = window; t < horizon; ++t) {
    StateVector s = env.state();
    for (std::size_t i = 0; i < kNumFeatures; ++i)
      if (options.pinned[i]) s[i] = 0.0;
    const Vector q = q_values(model, s);
    const std::size_t a_idx = greedy_action(q);
    const Action a = model.actions.action(a_idx);
    if (options.observer) options.observer(t, s, q, a_idx);
    const double f_t = env.f_candidate();
    const double alpha_t = env.alpha();
    const StepStatus st = env.step(a);
    const StepKind k = kind_of(a);
    count(tr, k);
    tr.steps.push_back({t, f_t, alpha_t, k, env.accepted_count(), kNaN, kNaN});
    if (st == StepStatus::diverged) {
      tr.diverged = true;
      break;
    }
  }
  if (!tr.diverged) tr.steps.push_back({horizon, env.f_candidate(), env.alpha(), StepKind::none, env.accepted_count(), kNaN, kNaN});
  tr.final_f = env.f_candidate();
  tr.final_x = env.candidate();
  tr.evaluations = env.evaluations();
  return tr;
}

OptRunTrace linesearch_gd(const ObjectiveFn& objective, const LineSearchConfig& cfg, std::span<const double> x1,
                          const std::function<void(const LineSearchObservation&)>& observer) {
  if (!(cfg.c >= 0.0)) throw ConfigError("line-search constant c must be non-negative");
  if (cfg.window < 1) throw ConfigError("line-search window M must be >= 1");
  if (!(cfg.alpha_c > 0.0)) throw ConfigError("alpha_c must be positive");
  if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0)) throw ConfigError("shrink factor must lie in (0, 1)");
  if (cfg.budget < 1) throw ConfigError("evaluation budget must be >= 1");
  if (x1.size() != objective.num_params()) throw ConfigError("x_1 does not match the objective");

  OptRunTrace tr;
  tr.optimizer = cfg.window == 1 ? "armijo" : "nonmonotone";
  ParamVector x_bar(x1.begin(), x1.end());
  auto lg = objective.evaluate_with_gradient(x_bar);
  tr.evaluations = 1;
  double f_bar = lg.loss;
  ParamVector g_bar = std::move(lg.grad);
  double g_dot_d = -kernels::dot(g_bar, g_bar);
  std::deque<double> accepted_f{f_bar};
  tr.steps.push_back({1, f_bar, cfg.alpha_c, StepKind::start, 0, kNaN, kNaN});

  double alpha = cfg.alpha_c;
  ParamVector x(x_bar.size());
  while (tr.evaluations < cfg.budget) {
    if (alpha < cfg.min_alpha) {
      tr.stalled = true;
      break;
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x_bar[i] - alpha * g_bar[i];
    LossGrad cand;
    try {
      cand = objective.evaluate_with_gradient(x);
    } catch (const NumericError&) {
      cand.loss = std::numeric_limits<double>::infinity();
    }
    ++tr.evaluations;
    if (!std::isfinite(cand.loss)) cand.loss = std::numeric_limits<double>::infinity();
    const double ref = *std::max_element(accepted_f.begin(), accepted_f.end());
    const bool ok = std::isfinite(cand.loss) && sufficient_decrease_check(cand.loss, ref, alpha, g_dot_d, cfg.c);
    if (observer) observer({alpha, cand.loss, f_bar, g_dot_d, tr.evaluations});
    const StepKind k = ok ? StepKind::accept : StepKind::half;
    count(tr, k);
    tr.steps.push_back({tr.evaluations, cand.loss, alpha, k, tr.accepts, g_dot_d, ref});
    if (ok) {
      x_bar = x;
      f_bar = cand.loss;
      g_bar = std::move(cand.grad);
      g_dot_d = -kernels::dot(g_bar, g_bar);
      accepted_f.push_back(f_bar);
      if (accepted_f.size() > cfg.window) accepted_f.pop_front();
      alpha = cfg.alpha_c;
    } else {
      alpha *= cfg.shrink;
    }
  }
  tr.final_x = std::move(x_bar);
  tr.final_f = f_bar;
  return tr;
}

OptRunTrace fixed_gd(const ObjectiveFn& objective, double alpha, std::span<const double> x1, std::size_t horizon) {
  if (horizon < 1) throw ConfigError("evaluation budget must be >= 1");
  if (x1.size() != objective.num_params()) throw ConfigError("x_1 does not match the objective");
  OptRunTrace tr;
  tr.optimizer = "fixed";
  ParamVector x(x1.begin(), x1.end());
  auto lg = objective.evaluate_with_gradient(x);
  tr.evaluations = 1;
  tr.steps.push_back({1, lg.loss, alpha, StepKind::start, 0, kNaN, kNaN});
  for (std::size_t t = 2; t <= horizon; ++t) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= alpha * lg.grad[i];
    try {
      lg = objective.evaluate_with_gradient(x);
    } catch (const NumericError&) {
      lg.loss = std::numeric_limits<double>::infinity();
    }
    ++tr.evaluations;
    ++tr.accepts;
    tr.steps.push_back({t, lg.loss, alpha, StepKind::accept, tr.accepts, kNaN, kNaN});
    if (!std::isfinite(lg.loss)) {
      tr.diverged = true;
      break;
    }
  }
  tr.final_f = lg.loss;
  tr.final_x = std::move(x);
  return tr;
}

void write_trace_csv(const OptRunTrace& trace, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os << "t,f,alpha,action,accepted_count\n";
  char buf[160];
  for (const auto& s : trace.steps) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%s,%zu\n", s.t, s.f, s.alpha, step_kind_name(s.action),
                  s.accepted_count);
    os << buf;
  }
}

OptRunTrace read_trace_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open trace " + path);
  std::string line;
  if (!std::getline(is, line) || line != "t,f,alpha,action,accepted_count")
    throw ParseError("missing trace header", 1);
  OptRunTrace tr;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string t, f, alpha, action, accepted;
    if (!std::getline(row, t, ',') || !std::getline(row, f, ',') || !std::getline(row, alpha, ',') ||
        !std::getline(row, action, ',') || !std::getline(row, accepted))
      throw ParseError("trace row needs 5 fields", lineno);
    TraceStep s;
    try {
      s.t = std::stoul(t);
      s.f = std::stod(f);
      s.alpha = std::stod(alpha);
      s.accepted_count = std::stoul(accepted);
    } catch (const std::exception&) {
      throw ParseError("malformed number in trace", lineno);
    }
    s.action = parse_kind(action, lineno);
    count(tr, s.action);
    tr.steps.push_back(s);
  }
  if (!tr.steps.empty()) tr.final_f = tr.steps.back().f;
  return tr;
}

}  // namespace qgd
