#pragma once
// Deployed optimizers. All of them spend one objective evaluation per
// proposed iterate and stop once the budget T is used.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qgd/dqn.hpp"
#include "qgd/features.hpp"
#include "qgd/objective.hpp"

namespace qgd {

enum class StepKind { start, warmup, half, double_rate, accept, none };

const char* step_kind_name(StepKind k) noexcept;

struct TraceStep {
  std::size_t t = 0;
  double f = 0.0;      // objective at the iterate evaluated at step t
  double alpha = 0.0;  // learning rate that produced it / in effect at t
  StepKind action = StepKind::none;  // decision taken at t
  std::size_t accepted_count = 0;    // accepted iterates after the decision
  /// Line searches: d^T grad f(x_bar) and max of the reference window used
  /// for the acceptance test. NaN elsewhere.
  double g_dot_d = 0.0;
  double reference_f = 0.0;
};

struct OptRunTrace {
  std::string optimizer;
  std::vector<TraceStep> steps;
  ParamVector final_x;
  double final_f = 0.0;
  std::size_t halves = 0;
  std::size_t doubles = 0;
  std::size_t accepts = 0;
  std::size_t evaluations = 0;
  bool diverged = false;
  bool stalled = false;

  /// Fraction of decisions that halved the learning rate.
  double halving_frequency() const;
};

struct LineSearchConfig {
  double c = 1e-4;
  std::size_t window = 1;  // 1 = Armijo, >1 = nonmonotone
  double alpha_c = 1.0;
  double shrink = 0.5;
  std::size_t budget = 100;  // T
  double min_alpha = 1e-30;
};

/// f_new <= history_max + c * alpha * g_dot_d
bool sufficient_decrease_check(double f_new, double history_max, double alpha, double g_dot_d, double c);

struct QgdRunOptions {
  /// Features forced to 0 after scaling (ablation).
  std::array<bool, kNumFeatures> pinned{};
  /// Called with the scaled state and q-values at every decision.
  std::function<void(std::size_t t, const StateVector&, const Vector& q, std::size_t action)> observer;
};

/// Greedy Q-gradient descent with the model's action set and alpha_c.
OptRunTrace qgd_run(const ObjectiveFn& objective, const DqnModel& model, std::span<const double> x1,
                    std::size_t horizon, std::size_t window, const QgdRunOptions& options = {});

struct LineSearchObservation {
  double alpha = 0.0;
  double f_candidate = 0.0;
  double f_accepted = 0.0;
  double g_dot_d = 0.0;
  std::size_t evaluation = 0;
};

OptRunTrace linesearch_gd(const ObjectiveFn& objective, const LineSearchConfig& cfg, std::span<const double> x1,
                          const std::function<void(const LineSearchObservation&)>& observer = {});

OptRunTrace fixed_gd(const ObjectiveFn& objective, double alpha, std::span<const double> x1, std::size_t horizon);

/// CSV with columns t,f,alpha,action,accepted_count.
void write_trace_csv(const OptRunTrace& trace, const std::string& path);
OptRunTrace read_trace_csv(const std::string& path);

}  // namespace qgd
