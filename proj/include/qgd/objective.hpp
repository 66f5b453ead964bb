#pragma once
// Classification objective f(x) = (1/N) sum_i xent(h(z_i; x), t_i) and the
// synthetic Gaussian-cluster data it is evaluated on.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "qgd/nn.hpp"

namespace qgd {

struct Dataset {
  std::uint64_t seed = 0;
  std::size_t n = 0;  // samples
  std::size_t d = 0;  // input width
  std::size_t k = 0;  // classes
  Vector inputs;      // n x d, row-major
  std::vector<int> labels;

  BatchView batch() const { return {inputs, n, d}; }
  /// Throws ValidationError on NaN inputs, labels outside [0, k), or size mismatches.
  void validate() const;
  /// FNV-1a over the header fields, the input bit patterns and the labels.
  std::uint64_t checksum() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// K clusters centred uniformly in [-1,1]^d with isotropic Gaussian spread;
/// sample i belongs to class i mod K.
Dataset generate_dataset(std::uint64_t seed, std::size_t n, std::size_t d, std::size_t k,
                         double cluster_spread);

void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

class ObjectiveFn {
 public:
  ObjectiveFn(Architecture arch, std::shared_ptr<const Dataset> data, double f_lb = 0.0);

  const Architecture& arch() const { return arch_; }
  const Dataset& data() const { return *data_; }
  double lower_bound() const { return f_lb_; }
  std::size_t num_params() const { return arch_.num_params(); }

  double evaluate(std::span<const double> x) const;
  ParamVector gradient(std::span<const double> x) const;
  LossGrad evaluate_with_gradient(std::span<const double> x) const;

 private:
  Architecture arch_;
  std::shared_ptr<const Dataset> data_;
  double f_lb_;
};

/// Starting iterate x_1: uniform in [-0.5, 0.5] / sqrt(fan_in), layer by layer.
ParamVector initial_iterate(const Architecture& arch, std::uint64_t seed);

}  // namespace qgd
