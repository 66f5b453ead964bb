#pragma once
// Q-learning with experience replay over repeated optimization episodes.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qgd/dqn.hpp"
#include "qgd/environment.hpp"
#include "qgd/objective.hpp"
#include "qgd/replay.hpp"

namespace qgd {

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.1;
  std::size_t decay_episodes = 100;
};

/// Linear from `start` at episode 0 to `end` at `decay_episodes`, flat after.
double epsilon_at(std::size_t episode, const EpsilonSchedule& s);

struct TrainConfig {
  Variant variant = Variant::v1;
  std::size_t episodes = 2000;  // E
  std::size_t horizon = 100;    // T
  std::size_t window = 3;       // M
  double gamma = 0.99;
  EpsilonSchedule epsilon;
  std::size_t recent_episodes = 45;  // A
  std::size_t best_episodes = 5;     // B
  std::size_t batch_size = 32;
  std::size_t best_enabled_after = 50;
  double c1 = 0.1;
  double c2 = 0.12;
  double alpha_c = 1.0;
  std::optional<std::pair<double, double>> alpha_bounds;
  DqnOptimizerKind optimizer = DqnOptimizerKind::sgd;
  double dqn_step = 0.01;
  double rms_decay = 0.9;
  double rms_stabilizer = 1e-8;
  std::vector<std::size_t> hidden = {32, 16};
  std::uint64_t seed = 0;
  bool record_wall_time = false;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

/// Reward for `action` given the resulting candidate objective and the
/// objective of the (possibly new) accepted iterate.
double assign_reward(Action action, double f_candidate, double f_accepted, double f_lb, const TrainConfig& cfg);

struct TrainLogRow {
  std::size_t episode = 0;
  double rmax = 0.0;
  double final_f = 0.0;
  double epsilon = 0.0;
  double wall_ms = 0.0;
  std::size_t steps = 0;
  bool terminated_early = false;

  friend bool operator==(const TrainLogRow&, const TrainLogRow&) = default;
};

struct EpisodeResult {
  std::shared_ptr<EpisodeRecord> record;
  TrainLogRow log;
  /// Chosen action index per committed experience.
  std::vector<std::size_t> actions;
  /// Realized reward per committed experience.
  std::vector<double> rewards;
};

class Trainer {
 public:
  /// `scaling` must already be calibrated. x1 is the fixed starting iterate.
  Trainer(const ObjectiveFn& objective, TrainConfig cfg, FeatureScaling scaling, ParamVector x1);

  /// Resumes from a checkpoint written by save_checkpoint.
  static Trainer resume(const ObjectiveFn& objective, TrainConfig cfg, ParamVector x1,
                        const std::string& model_path, const std::string& state_path);

  const TrainConfig& config() const { return cfg_; }
  const DqnModel& model() const { return model_; }
  const ReplayMemory& memory() const { return memory_; }
  const std::vector<TrainLogRow>& log() const { return log_; }
  std::size_t next_episode() const { return next_episode_; }

  /// Runs one episode with the current epsilon and advances the episode counter.
  EpisodeResult run_episode();

  /// Runs episodes until `cfg.episodes` have completed. `on_episode` sees each
  /// result; checkpoints are written every `checkpoint_every` episodes when > 0.
  void train(const std::function<void(const EpisodeResult&)>& on_episode = {},
             std::size_t checkpoint_every = 0, const std::string& checkpoint_prefix = {});

  void save_checkpoint(const std::string& model_path, const std::string& state_path) const;

  /// Called with every sampled mini-batch; for tests.
  std::function<void(std::size_t episode, std::span<const Experience>)> on_minibatch;

 private:
  Trainer(const ObjectiveFn& objective, TrainConfig cfg, DqnModel model, ParamVector x1);
  EnvConfig env_config() const;

  const ObjectiveFn& objective_;
  TrainConfig cfg_;
  DqnModel model_;
  ParamVector x1_;
  DqnOptimizer opt_;
  ReplayMemory memory_;
  Rng rng_;
  std::size_t next_episode_ = 0;
  std::vector<TrainLogRow> log_;
};

void write_train_log(const std::vector<TrainLogRow>& log, const std::string& path);

}  // namespace qgd
