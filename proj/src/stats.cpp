#include "qgd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <math.h>
#include <boost/math/statistics/bivariate_statistics.hpp>
#include <boost/math/statistics/univariate_statistics.hpp>
#include <numeric>

#include "qgd/error.hpp"

namespace qgd::stats {

double median(std::vector<double> values) {
  if (values.empty()) throw ConfigError("median of an empty sample");
  return boost::math::statistics::median(values);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("correlation needs two equal samples of size >= 2");
  std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
  return boost::math::statistics::correlation_coefficient(a, b);
}

std::vector<double> ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return values[i] < values[j]; });
  std::vector<double> r(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  return pearson(rx, ry);
}

}  // namespace qgd::stats
