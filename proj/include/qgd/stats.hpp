#pragma once

#include <span>
#include <vector>

namespace qgd::stats {

double median(std::vector<double> values);
double pearson(std::span<const double> x, std::span<const double> y);
/// Ranks with ties averaged, 1-based.
std::vector<double> ranks(std::span<const double> values);
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace qgd::stats
