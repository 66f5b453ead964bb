#pragma once
// Experiment drivers behind the CLI subcommands. Everything here is a pure
// function of (RunConfig, seed); file output is handled by the callers.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qgd/config.hpp"
#include "qgd/descent.hpp"
#include "qgd/dqn.hpp"
#include "qgd/objective.hpp"
#include "qgd/rewards.hpp"
#include "qgd/trainer.hpp"

namespace qgd {

/// Objective, dataset and starting iterate for one run seed.
struct SeedContext {
  std::uint64_t seed = 0;
  std::shared_ptr<const Dataset> data;
  std::shared_ptr<const ObjectiveFn> objective;
  ParamVector x1;
};

/// Builds the training objective for `seed`. `data_factor` multiplies N and
/// `width_factor` the hidden widths (the larger test objective).
SeedContext make_context(const RunConfig& cfg, std::uint64_t seed, std::size_t data_factor = 1,
                         std::size_t width_factor = 1);

struct Calibration {
  FeatureScaling scaling;
  /// Raw (post-reciprocal) values of the calibrated features per evaluation.
  std::vector<std::array<double, 3>> observed;
};

/// Runs the Armijo baseline once and widens the observed per-feature range by
/// 10% on each side. A degenerate range (min == max) is opened to
/// [v - 0.5 max(|v|, 1e-3), v + 0.5 max(|v|, 1e-3)] before widening.
Calibration calibrate(const ObjectiveFn& objective, std::span<const double> x1, const LineSearchConfig& armijo,
                      std::size_t window, std::size_t horizon);

/// Scaling used for training `v`: the config's [scaling] block when present,
/// otherwise a fresh calibration. Fixed-range features come from the train
/// config; under v2 the learning-rate range also covers the alpha bounds.
FeatureScaling training_scaling(const RunConfig& cfg, const SeedContext& ctx, Variant v);

/// Widening rule used by calibrate, exposed for tests.
std::pair<double, double> widen_range(double lo, double hi);

/// One row per evaluated iterate of a training episode.
struct EpisodeDumpRow {
  std::int64_t episode = 0;
  std::size_t step = 0;
  double f = 0.0;
  std::string action;
  std::optional<double> reward;
};

struct TrainOutcome {
  DqnModel model;
  std::vector<TrainLogRow> log;
  std::vector<EpisodeDumpRow> episodes;
};

TrainConfig seeded_train_config(const RunConfig& cfg, Variant v, std::uint64_t seed);

/// Trains a model for `variant` on `ctx` with the given scaling.
TrainOutcome train_model(const RunConfig& cfg, const SeedContext& ctx, Variant variant,
                         const FeatureScaling& scaling, bool keep_episode_dump = false);

void append_episode_dump(const EpisodeResult& r, std::size_t window, std::vector<EpisodeDumpRow>& out);
void write_episode_dump(const std::vector<EpisodeDumpRow>& rows, const std::string& path);
std::vector<EpisodeDumpRow> read_episode_dump(const std::string& path);

struct ComparisonRow {
  std::string optimizer;
  double initial_f = 0.0;
  double final_f = 0.0;
  double halving_frequency = 0.0;
  std::size_t halves = 0;
  std::size_t doubles = 0;
  std::size_t accepts = 0;
  std::size_t evaluations = 0;
  bool diverged = false;
  double min_alpha = 0.0;
  double max_alpha = 0.0;
};

struct ComparisonReport {
  std::vector<OptRunTrace> traces;
  std::vector<ComparisonRow> rows;

  const ComparisonRow& row(const std::string& optimizer) const;
};

ComparisonRow summarize(const OptRunTrace& trace);

/// Runs Q-GD v1/v2 (for the models given), Armijo, nonmonotone and
/// fixed-rate GD from the same x_1 with budget `horizon`.
ComparisonReport compare_optimizers(const RunConfig& cfg, const ObjectiveFn& objective, std::span<const double> x1,
                                    const DqnModel* v1, const DqnModel* v2, std::size_t horizon);

struct QValueTrace {
  std::vector<std::size_t> t;
  std::vector<std::size_t> action;
  std::vector<double> q;
  std::vector<double> reward;
  std::vector<double> discounted_return;
  double correlation = 0.0;
};

/// Greedy training-style episode (actions at t = M..T, terminal at T) with
/// the predicted q(s_t)[a_t] and realized returns.
QValueTrace qvalue_trace(const ObjectiveFn& objective, std::span<const double> x1, const DqnModel& model,
                         const TrainConfig& train);

struct AblationRow {
  std::string feature;  // "none" for the baseline
  double final_f = 0.0;
  std::size_t halves = 0;
  std::size_t accepts = 0;
};

inline constexpr std::array<Feature, 3> kAblatedFeatures = {Feature::objective_value, Feature::grad_dot_dir,
                                                             Feature::alignment};

std::vector<AblationRow> ablation(const ObjectiveFn& objective, std::span<const double> x1, const DqnModel& model,
                                  std::size_t horizon, std::size_t window);

struct RewardScatter {
  RewardKind kind;
  std::vector<std::int64_t> episode;
  std::vector<double> final_f;
  std::vector<double> rmax;
  /// Spearman correlation between -final_f and rmax.
  double rank_correlation = 0.0;
};

const char* reward_kind_name(RewardKind k) noexcept;

std::array<RewardScatter, 3> reward_compare(const std::vector<EpisodeDumpRow>& episodes, double gamma, double c,
                                            double f_lb);

}  // namespace qgd
