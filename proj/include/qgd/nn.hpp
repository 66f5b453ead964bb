#pragma once
// Dense feedforward network over a flat parameter vector.
//
// Parameter layout, per layer l mapping n_l inputs to n_{l+1} outputs:
//   W_l  (n_{l+1} x n_l, row-major)  followed by  b_l (n_{l+1})
// Layers are stored consecutively. Hidden layers use the logistic sigmoid;
// the output head is either softmax (cross-entropy loss) or identity
// (half squared-error loss).

#include <cstddef>
#include <span>
#include <vector>

namespace qgd {

using Vector = std::vector<double>;
using ParamVector = std::vector<double>;

enum class OutputHead { softmax_xent, identity };

struct Architecture {
  std::vector<std::size_t> layer_sizes;
  OutputHead head = OutputHead::softmax_xent;
  bool biases = true;

  /// Throws ConfigError unless there are >= 2 layers, all of size >= 1.
  void validate() const;
  std::size_t num_params() const;
  std::size_t num_layers() const { return layer_sizes.size(); }
  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }
  /// Offset of the weight block of the transition from layer l to l+1.
  std::size_t weight_offset(std::size_t l) const;
  /// Offset of the bias block of that transition. Only valid with biases.
  std::size_t bias_offset(std::size_t l) const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Row-major view over a batch of equally sized vectors.
struct BatchView {
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::span<const double> row(std::size_t i) const { return data.subspan(i * cols, cols); }
};

struct ForwardResult {
  /// activations[0] is the input; activations.back() is the network output
  /// (probabilities for softmax, raw values for identity).
  std::vector<Vector> activations;

  const Vector& output() const { return activations.back(); }
};

double sigmoid(double x) noexcept;

ForwardResult forward(const Architecture& arch, std::span<const double> params,
                      std::span<const double> input);

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

/// Mean cross-entropy over the batch; softmax head only.
LossGrad loss_and_gradient(const Architecture& arch, std::span<const double> params,
                           const BatchView& inputs, std::span<const int> labels);

/// Mean of 0.5 * ||h(z_i) - y_i||^2 over the batch; identity head only.
LossGrad loss_and_gradient(const Architecture& arch, std::span<const double> params,
                           const BatchView& inputs, const BatchView& targets);

/// Loss only (no backward pass), same conventions as loss_and_gradient.
double loss_only(const Architecture& arch, std::span<const double> params,
                 const BatchView& inputs, std::span<const int> labels);

}  // namespace qgd
