#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "qgd/error.hpp"
#include "qgd/features.hpp"

using namespace qgd;

TEST(EncodeMinMax, Examples) {
  const std::vector<double> w = {1, 2, 3};
  EXPECT_EQ(encode_min_max(0.5, w), 1);
  EXPECT_EQ(encode_min_max(1.0, w), 1);
  EXPECT_EQ(encode_min_max(2.5, w), 0);
  EXPECT_EQ(encode_min_max(3.0, w), 0);
  EXPECT_EQ(encode_min_max(4.0, w), -1);
  EXPECT_THROW(encode_min_max(1.0, std::vector<double>{}), ConfigError);
}

TEST(Alignment, Examples) {
  EXPECT_EQ(alignment(std::vector<double>{1, 1}, std::vector<double>{1, 1}), 1.0);
  EXPECT_EQ(alignment(std::vector<double>{1, -1}, std::vector<double>{1, 1}), 0.0);
  EXPECT_EQ(alignment(std::vector<double>{-1, -2}, std::vector<double>{1, 3}), -1.0);
  EXPECT_EQ(alignment(std::vector<double>{0, 2, 0, 1}, std::vector<double>{0, 2, 0, 1}), 0.5);
  EXPECT_THROW(alignment(std::vector<double>{1}, std::vector<double>{1, 2}), ConfigError);
}

TEST(Alignment, SymmetricAndSelfCountsNonzeros) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> v(-2, 2);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> a(1 + rng() % 9), b(a.size());
    for (auto& x : a) x = v(rng);
    for (auto& x : b) x = v(rng);
    EXPECT_EQ(alignment(a, b), alignment(b, a));
    const double nz = static_cast<double>(std::count_if(a.begin(), a.end(), [](double x) { return x != 0; }));
    EXPECT_DOUBLE_EQ(alignment(a, a), nz / static_cast<double>(a.size()));
    EXPECT_LE(std::abs(alignment(a, b)), 1.0);
  }
}

TEST(ScaleFeature, Endpoints) {
  EXPECT_EQ(scale_feature(2.0, 2.0, 6.0), 1.0);
  EXPECT_EQ(scale_feature(6.0, 2.0, 6.0), -1.0);
  EXPECT_EQ(scale_feature(4.0, 2.0, 6.0), 0.0);
  EXPECT_EQ(scale_feature(100.0, 2.0, 6.0), -1.0);
  EXPECT_EQ(scale_feature(-100.0, 2.0, 6.0), 1.0);
  EXPECT_EQ(scale_feature(std::nan(""), 2.0, 6.0), 0.0);
}

TEST(ReciprocalShift, Examples) {
  EXPECT_EQ(reciprocal_shift(2.0, 0.0), 0.5);
  EXPECT_NEAR(reciprocal_shift(1.1, 0.1), 1.0, 1e-15);
  EXPECT_THROW(reciprocal_shift(0.05, 0.1), DomainError);
  EXPECT_THROW(reciprocal_shift(0.1, 0.1), DomainError);
}

TEST(UpdateWindow, Examples) {
  HistoryWindow h;
  h.capacity = 3;
  const std::vector<double> d = {1.0};
  h.lowest = {1, 2, 3};
  update_window(h, 0.5, d);
  EXPECT_EQ(h.lowest, (std::vector<double>{0.5, 1, 2}));
  h.lowest = {1, 2, 3};
  update_window(h, 5, d);
  EXPECT_EQ(h.lowest, (std::vector<double>{1, 2, 3}));
  HistoryWindow e;
  e.capacity = 3;
  update_window(e, 7, d);
  EXPECT_EQ(e.lowest, (std::vector<double>{7}));
  EXPECT_EQ(e.t, 1u);
}

TEST(UpdateWindow, DirectionRotation) {
  HistoryWindow h;
  h.capacity = 2;
  const std::vector<double> a = {1, 2}, b = {3, 4};
  update_window(h, 1.0, a);
  EXPECT_EQ(h.current_direction, a);
  EXPECT_TRUE(h.previous_direction.empty());
  update_window(h, 1.0, a);  // unchanged direction keeps the pair
  EXPECT_TRUE(h.previous_direction.empty());
  update_window(h, 1.0, b);
  EXPECT_EQ(h.current_direction, b);
  EXPECT_EQ(h.previous_direction, a);
}

namespace {

// Keep-everything oracle: stable sort of the full history, first m entries.
std::vector<double> brute_lowest(const std::vector<double>& all, std::size_t m) {
  std::vector<double> s = all;
  std::stable_sort(s.begin(), s.end());
  if (s.size() > m) s.resize(m);
  return s;
}

int brute_encode(double f, const std::vector<double>& window) {
  double lo = window[0], hi = window[0];
  for (double v : window) {
    lo = v < lo ? v : lo;
    hi = v > hi ? v : hi;
  }
  return f <= lo ? 1 : (f <= hi ? 0 : -1);
}

}  // namespace

TEST(UpdateWindow, MatchesBruteForceOracle) {
  std::mt19937_64 rng(8);
  for (int draw = 0; draw < 2000; ++draw) {
    HistoryWindow h;
    h.capacity = 1 + rng() % 6;
    std::vector<double> all;
    const std::vector<double> d = {1.0};
    const int len = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < len; ++i) {
      // Coarse grid makes ties common.
      const double f = static_cast<double>(rng() % 12) / 4.0;
      const int enc = h.lowest.empty() ? 1 : encode_min_max(f, h.lowest);
      if (!all.empty()) {
        ASSERT_EQ(enc, brute_encode(f, brute_lowest(all, h.capacity)));
      }
      all.push_back(f);
      update_window(h, f, d);
      ASSERT_EQ(h.lowest, brute_lowest(all, h.capacity));
    }
  }
}

TEST(FeatureScaling, FixedRanges) {
  const auto s = FeatureScaling::with_fixed_ranges(0.0, 3, 100);
  EXPECT_TRUE(s[Feature::objective_value].reciprocal);
  EXPECT_TRUE(s[Feature::grad_dot_dir].reciprocal);
  EXPECT_FALSE(s[Feature::learning_rate].reciprocal);
  EXPECT_EQ(s[Feature::eval_count].min, 3.0);
  EXPECT_EQ(s[Feature::eval_count].max, 100.0);
  EXPECT_NO_THROW(s.validate());
  auto bad = s;
  bad[Feature::alignment].max = bad[Feature::alignment].min;
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(FeatureScaling::with_fixed_ranges(0.0, 3, 3), ConfigError);
}

TEST(BuildState, EndpointsAndEncoding) {
  auto s = FeatureScaling::with_fixed_ranges(0.0, 3, 10);
  HistoryWindow h;
  h.capacity = 3;
  h.lowest = {1.0, 2.0, 3.0};
  h.t = 10;
  h.alpha = 0.5;
  const std::vector<double> g = {0.5, -0.5}, d = {-0.5, 0.5};
  h.current_direction = d;
  const auto st = build_state(h, 0.25, g, d, s);
  EXPECT_EQ(st[static_cast<std::size_t>(Feature::eval_count)], -1.0);
  EXPECT_EQ(st[static_cast<std::size_t>(Feature::encoding)], 1.0);
  EXPECT_EQ(st[static_cast<std::size_t>(Feature::learning_rate)], 0.0);
  // 1/f = 4 and 1/|g.d| = 2 both above max 1: clipped.
  EXPECT_EQ(st[static_cast<std::size_t>(Feature::objective_value)], -1.0);
  EXPECT_EQ(st[static_cast<std::size_t>(Feature::grad_dot_dir)], -1.0);
  h.t = 3;
  EXPECT_EQ(build_state(h, 2.5, g, d, s)[static_cast<std::size_t>(Feature::eval_count)], 1.0);
  EXPECT_EQ(build_state(h, 2.5, g, d, s)[static_cast<std::size_t>(Feature::encoding)], 0.0);
  EXPECT_EQ(build_state(h, 3.5, g, d, s)[static_cast<std::size_t>(Feature::encoding)], -1.0);
}

TEST(BuildState, RawValuesAfterReciprocal) {
  auto s = FeatureScaling::with_fixed_ranges(0.5, 3, 10);
  HistoryWindow h;
  h.capacity = 3;
  h.lowest = {1.0};
  h.t = 4;
  h.alpha = 2.0;
  const std::vector<double> g = {1.0, 1.0}, d = {-1.0, -1.0};
  h.current_direction = {1.0, -1.0};
  const auto raw = raw_features(h, 1.5, g, d, s);
  EXPECT_EQ(raw[0], 2.0);
  EXPECT_EQ(raw[1], 1.0);   // 1 / (1.5 - 0.5)
  EXPECT_EQ(raw[2], 0.5);   // 1 / |d.g|
  EXPECT_EQ(raw[3], -1.0);  // above the single window entry
  EXPECT_EQ(raw[4], 4.0);
  EXPECT_EQ(raw[5], 0.0);   // against the differing current direction
  EXPECT_THROW(raw_features(h, 0.5, g, d, s), DomainError);
}

TEST(BuildState, FuzzedHistoriesStayInRange) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int draw = 0; draw < 20000; ++draw) {
    auto s = FeatureScaling::with_fixed_ranges(0.0, 3, 100);
    for (Feature f : {Feature::learning_rate, Feature::objective_value, Feature::grad_dot_dir}) {
      const double a = std::exp(10 * u(rng) - 5), b = a * (1 + 10 * u(rng)) + 1e-9;
      s[f].min = a;
      s[f].max = b;
    }
    HistoryWindow h;
    h.capacity = 1 + rng() % 5;
    const std::size_t n = 1 + rng() % 6;
    std::vector<double> d(n), g(n);
    const int len = static_cast<int>(rng() % 8);
    for (int i = 0; i < len; ++i) {
      for (auto& v : d) v = u(rng) - 0.5;
      update_window(h, std::exp(8 * u(rng) - 4), d);
    }
    h.t = rng() % 300;
    h.alpha = std::exp(20 * u(rng) - 10);
    for (auto& v : g) v = std::exp(10 * u(rng) - 5) * (u(rng) < 0.5 ? -1 : 1);
    for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    const auto st = build_state(h, std::exp(12 * u(rng) - 6), g, d, s);
    for (double v : st) ASSERT_TRUE(v >= -1.0 && v <= 1.0);
    const double enc = st[static_cast<std::size_t>(Feature::encoding)];
    ASSERT_TRUE(enc == -1.0 || enc == 0.0 || enc == 1.0);
  }
}
