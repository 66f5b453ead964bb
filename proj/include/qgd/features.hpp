#pragma once
// Six-feature optimizer state fed to the Q-network, each mapped into [-1, 1].

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "qgd/nn.hpp"

namespace qgd {

inline constexpr std::size_t kNumFeatures = 6;

enum class Feature : std::size_t {
  learning_rate = 0,
  objective_value = 1,
  grad_dot_dir = 2,
  encoding = 3,
  eval_count = 4,
  alignment = 5,
};

const char* feature_name(Feature f) noexcept;

/// Range and optional reciprocal shift for one feature.
struct FeatureRange {
  double min = -1.0;
  double max = 1.0;
  /// Shift c used by 1/(raw - c); ignored unless `reciprocal` is set.
  double shift = 0.0;
  bool reciprocal = false;

  friend bool operator==(const FeatureRange&, const FeatureRange&) = default;
};

struct FeatureScaling {
  std::array<FeatureRange, kNumFeatures> ranges{};

  FeatureRange& operator[](Feature f) { return ranges[static_cast<std::size_t>(f)]; }
  const FeatureRange& operator[](Feature f) const { return ranges[static_cast<std::size_t>(f)]; }

  /// Throws ConfigError unless max > min for every feature.
  void validate() const;

  /// Ranges for learning rate, objective and gradient-dot are placeholders
  /// until calibrated; the remaining three are fixed by construction
  /// (encoding passes through, eval count spans [m, t_max], alignment [-1, 1]).
  static FeatureScaling with_fixed_ranges(double f_lb, std::size_t m, std::size_t t_max);

  friend bool operator==(const FeatureScaling&, const FeatureScaling&) = default;
};

using StateVector = std::array<double, kNumFeatures>;

/// Running per-episode history the features are computed from.
struct HistoryWindow {
  std::size_t capacity = 1;
  /// The `capacity` smallest objective values seen so far, ascending. Equal
  /// values keep their insertion order.
  std::vector<double> lowest;
  /// Descent direction in effect at the previous step and the one before it
  /// changed last.
  Vector current_direction;
  Vector previous_direction;
  std::size_t t = 0;
  double alpha = 0.0;
};

/// 1 if f <= min(window), 0 if min < f <= max, -1 otherwise. Window must be non-empty.
int encode_min_max(double f, std::span<const double> window);

/// (1/n) sum sign(d[i] * d_prev[i]) with sign(0) = 0.
double alignment(std::span<const double> d, std::span<const double> d_prev);

/// 1 - 2 (raw - min) / (max - min), clipped to [-1, 1].
double scale_feature(double raw, double min, double max);

/// 1 / (raw - c); DomainError when raw <= c.
double reciprocal_shift(double raw, double c);

/// Inserts f into the lowest-values list (evicting the largest beyond
/// capacity), rotates the direction pair when d_t differs from the current
/// direction, and advances t.
void update_window(HistoryWindow& history, double f_t, std::span<const double> d_t);

/// Pre-transform values of the six features. The encoding is already in
/// {-1, 0, 1}; objective and gradient-dot entries are after the reciprocal
/// shift (these are the values calibration records).
StateVector raw_features(const HistoryWindow& history, double f_t, std::span<const double> grad,
                         std::span<const double> d_t, const FeatureScaling& scaling);

/// Applies range scaling to raw_features (encoding passes through).
StateVector scale_features(const StateVector& raw, const FeatureScaling& scaling);

StateVector build_state(const HistoryWindow& history, double f_t, std::span<const double> grad,
                        std::span<const double> d_t, const FeatureScaling& scaling);

}  // namespace qgd
