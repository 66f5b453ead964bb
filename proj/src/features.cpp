#include "qgd/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qgd/error.hpp"
#include "qgd/kernels.hpp"

namespace qgd {

const char* feature_name(Feature f) noexcept {
  switch (f) {
    case Feature::learning_rate: return "learning_rate";
    case Feature::objective_value: return "objective_value";
    case Feature::grad_dot_dir: return "grad_dot_dir";
    case Feature::encoding: return "encoding";
    case Feature::eval_count: return "eval_count";
    case Feature::alignment: return "alignment";
  }
  return "?";
}

void FeatureScaling::validate() const {
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    const auto& r = ranges[i];
    if (!(r.max > r.min) || !std::isfinite(r.min) || !std::isfinite(r.max))
      throw ConfigError(std::string("feature scaling for ") + feature_name(static_cast<Feature>(i)) +
                        " needs finite max > min");
  }
}

FeatureScaling FeatureScaling::with_fixed_ranges(double f_lb, std::size_t m, std::size_t t_max) {
  if (t_max <= m) throw ConfigError("episode length T must exceed the window M");
  FeatureScaling s;
  s[Feature::learning_rate] = {0.0, 1.0, 0.0, false};
  s[Feature::objective_value] = {0.0, 1.0, f_lb, true};
  s[Feature::grad_dot_dir] = {0.0, 1.0, 0.0, true};
  s[Feature::encoding] = {-1.0, 1.0, 0.0, false};
  s[Feature::eval_count] = {static_cast<double>(m), static_cast<double>(t_max), 0.0, false};
  s[Feature::alignment] = {-1.0, 1.0, 0.0, false};
  return s;
}

int encode_min_max(double f, std::span<const double> window) {
  if (window.empty()) throw ConfigError("encode_min_max needs a non-empty window");
  const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
  if (f <= *lo) return 1;
  if (f <= *hi) return 0;
  return -1;
}

double alignment(std::span<const double> d, std::span<const double> d_prev) {
  if (d.size() != d_prev.size()) throw ConfigError("alignment: direction lengths differ");
  if (d.empty()) throw ConfigError("alignment: empty direction");
  long sum = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double p = d[i] * d_prev[i];
    sum += (p > 0.0) - (p < 0.0);
  }
  return static_cast<double>(sum) / static_cast<double>(d.size());
}

double scale_feature(double raw, double min, double max) {
  const double s = 1.0 - 2.0 * (raw - min) / (max - min);
  if (std::isnan(s)) return 0.0;
  return std::clamp(s, -1.0, 1.0);
}

double reciprocal_shift(double raw, double c) {
  if (!(raw > c))
    throw DomainError("reciprocal shift needs raw > c (raw=" + std::to_string(raw) + ", c=" +
                      std::to_string(c) + ")");
  return 1.0 / (raw - c);
}

void update_window(HistoryWindow& h, double f_t, std::span<const double> d_t) {
  // upper_bound keeps earlier equal values ahead of the new one.
  const auto pos = std::upper_bound(h.lowest.begin(), h.lowest.end(), f_t);
  h.lowest.insert(pos, f_t);
  if (h.lowest.size() > h.capacity) h.lowest.resize(h.capacity);
  if (!std::equal(d_t.begin(), d_t.end(), h.current_direction.begin(), h.current_direction.end())) {
    h.previous_direction = std::move(h.current_direction);
    h.current_direction.assign(d_t.begin(), d_t.end());
  }
  ++h.t;
}

namespace {

// Alignment against the most recent direction that differs from d_t.
double history_alignment(const HistoryWindow& h, std::span<const double> d_t) {
  const bool same_as_current =
      std::equal(d_t.begin(), d_t.end(), h.current_direction.begin(), h.current_direction.end());
  const Vector& other = same_as_current ? h.previous_direction : h.current_direction;
  if (other.size() != d_t.size()) return alignment(d_t, d_t);
  return alignment(d_t, other);
}

}  // namespace

StateVector raw_features(const HistoryWindow& h, double f_t, std::span<const double> grad,
                         std::span<const double> d_t, const FeatureScaling& scaling) {
  StateVector raw{};
  raw[0] = h.alpha;
  const auto& obj = scaling[Feature::objective_value];
  raw[1] = obj.reciprocal ? reciprocal_shift(f_t, obj.shift) : f_t;
  const auto& gd = scaling[Feature::grad_dot_dir];
  const double dot = std::abs(kernels::dot(d_t, grad));
  raw[2] = gd.reciprocal ? reciprocal_shift(dot, gd.shift) : dot;
  raw[3] = h.lowest.empty() ? 1.0 : static_cast<double>(encode_min_max(f_t, h.lowest));
  raw[4] = static_cast<double>(h.t);
  raw[5] = history_alignment(h, d_t);
  return raw;
}

StateVector scale_features(const StateVector& raw, const FeatureScaling& scaling) {
  StateVector s{};
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (static_cast<Feature>(i) == Feature::encoding) {
      s[i] = raw[i];
      continue;
    }
    s[i] = scale_feature(raw[i], scaling.ranges[i].min, scaling.ranges[i].max);
  }
  return s;
}

StateVector build_state(const HistoryWindow& h, double f_t, std::span<const double> grad,
                        std::span<const double> d_t, const FeatureScaling& scaling) {
  return scale_features(raw_features(h, f_t, grad, d_t, scaling), scaling);
}

}  // namespace qgd
