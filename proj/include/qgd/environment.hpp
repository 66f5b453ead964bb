#pragma once
// Step mechanics shared by DQN training and deployed Q-gradient descent.
//
// After reset() the first m-1 iterates are plain gradient steps at alpha_c;
// from t = m on, every step applies one action to the learning rate and
// proposes the candidate x_{t+1} = x_bar + alpha_{t+1} d(x_bar).

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qgd/dqn.hpp"
#include "qgd/features.hpp"
#include "qgd/objective.hpp"

namespace qgd {

struct EnvConfig {
  Variant variant = Variant::v1;
  double alpha_c = 1.0;
  std::size_t window = 3;     // M
  std::size_t horizon = 100;  // T
  FeatureScaling scaling;
  /// Allowed learning-rate range; leaving it ends the step with out_of_bounds.
  std::optional<std::pair<double, double>> alpha_bounds;
};

enum class StepStatus { ok, out_of_bounds, diverged };

class QgdEnvironment {
 public:
  QgdEnvironment(const ObjectiveFn& objective, EnvConfig cfg);

  /// Evaluates x_1 and performs the warm-up steps; leaves t = M.
  /// Returns diverged when the warm-up produced a non-finite objective.
  StepStatus reset(std::span<const double> x1);

  std::size_t t() const { return history_.t; }
  double alpha() const { return history_.alpha; }
  double f_candidate() const { return f_cand_; }
  double f_accepted() const { return f_bar_; }
  const ParamVector& candidate() const { return x_cand_; }
  const ParamVector& accepted() const { return x_bar_; }
  const Vector& direction() const { return dir_; }
  const ParamVector& accepted_gradient() const { return g_bar_; }
  std::size_t accepted_count() const { return accepted_; }
  std::size_t evaluations() const { return evaluations_; }
  /// f at every evaluated iterate x_1, x_2, ... (warm-up included).
  const std::vector<double>& objective_trace() const { return trace_; }
  const HistoryWindow& history() const { return history_; }
  const EnvConfig& config() const { return cfg_; }

  /// Scaled state s_t.
  StateVector state() const;
  /// Features before range scaling (after the reciprocal shift).
  StateVector raw_state() const;

  /// Learning rate after applying `a` at the current step.
  double next_alpha(Action a) const;
  /// Objective at the candidate `a` would propose, without changing state.
  /// Counts as an evaluation. Returns +inf on overflow.
  double peek_objective(Action a);

  /// Applies `a`, proposes and evaluates x_{t+1}, advances t.
  StepStatus step(Action a);

 private:
  // f and gradient at x; f = +inf when the forward pass overflows.
  LossGrad evaluate(std::span<const double> x);

  const ObjectiveFn& objective_;
  EnvConfig cfg_;
  HistoryWindow history_;
  ParamVector x_bar_, x_cand_;
  ParamVector g_bar_, g_cand_;
  Vector dir_;
  double f_bar_ = 0.0;
  double f_cand_ = 0.0;
  std::size_t accepted_ = 0;
  std::size_t evaluations_ = 0;
  std::vector<double> trace_;
};

}  // namespace qgd
