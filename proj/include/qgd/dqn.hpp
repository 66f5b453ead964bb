#pragma once
// Q-network: q-value inference, epsilon-greedy policy, Bellman targets and
// mini-batch updates.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qgd/features.hpp"
#include "qgd/nn.hpp"

namespace qgd {

using Rng = std::mt19937_64;

enum class Variant : std::uint8_t { v1 = 1, v2 = 2 };
enum class Action { half, double_rate, accept };

const char* action_name(Action a) noexcept;
const char* variant_name(Variant v) noexcept;

/// v1: [half, accept]; v2: [half, double, accept].
class ActionSet {
 public:
  explicit ActionSet(Variant v = Variant::v1) : variant_(v) {}
  Variant variant() const { return variant_; }
  std::size_t size() const { return variant_ == Variant::v1 ? 2 : 3; }
  Action action(std::size_t index) const;
  /// CapabilityError when the action is not part of this set.
  std::size_t index_of(Action a) const;
  bool contains(Action a) const { return a != Action::double_rate || variant_ == Variant::v2; }

  friend bool operator==(const ActionSet&, const ActionSet&) = default;

 private:
  Variant variant_;
};

struct Experience {
  StateVector state{};
  std::size_t action = 0;
  double reward = 0.0;
  StateVector next_state{};
  bool terminal = false;
  std::int64_t episode_id = 0;
  std::int64_t step = 0;
  /// For the final time step: the reward each action would have received.
  /// When present the target of every action is its own reward.
  std::vector<double> all_action_rewards;

  friend bool operator==(const Experience&, const Experience&) = default;
};

struct DqnModel {
  Architecture arch;
  ParamVector params;
  ActionSet actions;
  FeatureScaling scaling;
  double alpha_c = 1.0;

  /// 6 x h1 x h2 x |A| network with identity output, zero parameters.
  static DqnModel create(Variant v, const FeatureScaling& scaling, double alpha_c,
                         std::vector<std::size_t> hidden = {32, 16});

  friend bool operator==(const DqnModel&, const DqnModel&) = default;
};

/// Uniform in [-r, r], r = sqrt(6 / (fan_in + fan_out)), per layer; biases zero.
void glorot_init(DqnModel& model, Rng& rng);

Vector q_values(const DqnModel& model, const StateVector& state);

/// Index of the largest entry; ties go to the lowest index.
std::size_t greedy_action(std::span<const double> q);

/// With probability epsilon a uniformly random action, otherwise greedy.
std::size_t select_action(const DqnModel& model, const StateVector& state, double epsilon, Rng& rng);

struct QTarget {
  Vector target;
  Vector estimate;
  std::size_t action = 0;
};

QTarget build_target(const DqnModel& model, const Experience& e, double gamma);

enum class DqnOptimizerKind { sgd, rmsprop };

/// Update rule for the network parameters. For rmsprop the running mean of
/// squared gradients lives here.
struct DqnOptimizer {
  DqnOptimizerKind kind = DqnOptimizerKind::sgd;
  double step = 0.01;
  double decay = 0.9;
  double stabilizer = 1e-8;
  Vector mean_square;
};

/// theta <- theta - step * mean_i (y_hat_i - y_i) dQ/dtheta, or its rmsprop
/// scaled form. Returns the batch loss 0.5 * mean ||y_hat - y||^2 before the update.
double apply_minibatch(DqnModel& model, std::span<const Experience> batch, double gamma, DqnOptimizer& opt);

/// Gradient of the batch loss for fixed targets; exposed for gradient checks.
LossGrad minibatch_loss_gradient(const DqnModel& model, std::span<const Experience> batch, double gamma);

std::string encode_model(const DqnModel& model);
DqnModel decode_model(std::string_view bytes);
void save_model(const DqnModel& model, const std::string& path);
DqnModel load_model(const std::string& path);

}  // namespace qgd
