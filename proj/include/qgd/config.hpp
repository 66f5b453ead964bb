#pragma once
// Run configuration: INI-style key/value file with sections.
//
//   [run]        seed, seeds, out
//   [objective]  layers, n, k, spread, biases, f_lb, dataset
//   [train]      shared TrainConfig fields
//   [train_v1]   per-variant overrides (episodes, alpha_c, optimizer, ...)
//   [train_v2]
//   [linesearch] c, nonmonotone_window, alpha_c, budget
//   [generalize] data_factor, width_factor, horizon_factor
//   [ablation]   seeds
//   [scaling]    learning_rate, objective_value, grad_dot_dir = "min,max"
//
// Every key is optional; defaults reproduce the desk profile.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qgd/descent.hpp"
#include "qgd/features.hpp"
#include "qgd/nn.hpp"
#include "qgd/trainer.hpp"

namespace qgd {

struct ObjectiveSpec {
  std::vector<std::size_t> layers = {8, 8, 4, 3};
  std::size_t n = 200;
  double spread = 0.3;
  bool biases = true;
  double f_lb = 0.0;
  /// Load this dataset instead of generating one.
  std::string dataset_path;

  std::size_t d() const { return layers.front(); }
  std::size_t k() const { return layers.back(); }
};

struct GeneralizeSpec {
  std::size_t data_factor = 3;
  std::size_t width_factor = 2;
  std::size_t horizon_factor = 2;
};

struct RunConfig {
  std::uint64_t seed = 7;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::string out_dir = "qgd-out";
  ObjectiveSpec objective;
  TrainConfig train_v1;
  TrainConfig train_v2;
  std::size_t checkpoint_every = 0;
  LineSearchConfig armijo;       // window 1
  std::size_t nonmonotone_window = 3;
  GeneralizeSpec generalize;
  std::vector<std::uint64_t> ablation_seeds = {0, 1, 2};
  /// Calibrated ranges, when present in the file.
  std::optional<FeatureScaling> scaling;

  const TrainConfig& train(Variant v) const { return v == Variant::v1 ? train_v1 : train_v2; }
  LineSearchConfig linesearch(std::size_t window) const {
    auto c = armijo;
    c.window = window;
    return c;
  }
};

/// Desk-scale defaults.
RunConfig desk_profile();

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text);
std::string format_run_config(const RunConfig& cfg);

/// Independent 64-bit seed for a named stream of a run seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

enum SeedStream : std::uint64_t { data_stream = 1, init_stream = 2, dqn_stream = 3 };

}  // namespace qgd
