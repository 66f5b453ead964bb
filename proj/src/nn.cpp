#include "qgd/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qgd/error.hpp"
#include "qgd/kernels.hpp"

namespace qgd {

void Architecture::validate() const {
  if (layer_sizes.size() < 2) throw ConfigError("architecture needs at least 2 layers");
  for (auto n : layer_sizes)
    if (n == 0) throw ConfigError("architecture layer sizes must be >= 1");
}

std::size_t Architecture::num_params() const {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
    total += (layer_sizes[l] + (biases ? 1 : 0)) * layer_sizes[l + 1];
  return total;
}

std::size_t Architecture::weight_offset(std::size_t l) const {
  std::size_t off = 0;
  for (std::size_t k = 0; k < l; ++k) off += (layer_sizes[k] + (biases ? 1 : 0)) * layer_sizes[k + 1];
  return off;
}

std::size_t Architecture::bias_offset(std::size_t l) const {
  return weight_offset(l) + layer_sizes[l] * layer_sizes[l + 1];
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

void check_params(const Architecture& arch, std::span<const double> params) {
  arch.validate();
  if (params.size() != arch.num_params())
    throw ConfigError("parameter vector has " + std::to_string(params.size()) +
                      " entries, architecture needs " + std::to_string(arch.num_params()));
}

void check_finite(std::span<const double> v, std::size_t layer) {
  for (double x : v)
    if (!std::isfinite(x))
      throw NumericError("non-finite activation in layer " + std::to_string(layer), layer);
}

// Per-call scratch reused across the samples of a batch.
struct Workspace {
  std::vector<Vector> act;    // act[l] = output of layer l (act[0] = input copy)
  std::vector<Vector> delta;  // delta[l] = dLoss/dpre-activation of layer l (l >= 1)
  Vector zero_bias;

  explicit Workspace(const Architecture& arch) {
    const auto L = arch.num_layers();
    act.resize(L);
    delta.resize(L);
    std::size_t widest = 0;
    for (std::size_t l = 0; l < L; ++l) {
      act[l].resize(arch.layer_sizes[l]);
      delta[l].resize(arch.layer_sizes[l]);
      widest = std::max(widest, arch.layer_sizes[l]);
    }
    zero_bias.assign(widest, 0.0);
  }
};

void softmax_inplace(Vector& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

// Leaves the output-layer pre-activations (logits) in ws.act.back().
void forward_pass(const Architecture& arch, std::span<const double> params,
                  std::span<const double> input, Workspace& ws) {
  const auto& sizes = arch.layer_sizes;
  std::copy(input.begin(), input.end(), ws.act[0].begin());
  const std::size_t last = sizes.size() - 1;
  for (std::size_t l = 0; l < last; ++l) {
    const std::size_t in = sizes[l], out = sizes[l + 1];
    auto w = params.subspan(arch.weight_offset(l), in * out);
    std::span<const double> b = arch.biases ? params.subspan(arch.bias_offset(l), out)
                                            : std::span<const double>(ws.zero_bias.data(), out);
    kernels::gemv(w, out, in, ws.act[l], b, ws.act[l + 1]);
    if (l + 1 < last)
      for (double& v : ws.act[l + 1]) v = sigmoid(v);
    check_finite(ws.act[l + 1], l + 1);
  }
}

// ws.delta.back() must hold dLoss/dlogits; accumulates the parameter gradient.
void backward_pass(const Architecture& arch, std::span<const double> params, Workspace& ws,
                   std::span<double> grad) {
  const auto& sizes = arch.layer_sizes;
  const std::size_t last = sizes.size() - 1;
  for (std::size_t l = last; l-- > 0;) {
    const std::size_t in = sizes[l], out = sizes[l + 1];
    auto gw = grad.subspan(arch.weight_offset(l), in * out);
    kernels::rank1_acc(1.0, ws.delta[l + 1], ws.act[l], gw);
    if (arch.biases) {
      auto gb = grad.subspan(arch.bias_offset(l), out);
      for (std::size_t j = 0; j < out; ++j) gb[j] += ws.delta[l + 1][j];
    }
    if (l == 0) break;
    auto w = params.subspan(arch.weight_offset(l), in * out);
    std::fill(ws.delta[l].begin(), ws.delta[l].end(), 0.0);
    kernels::gemv_t_acc(w, out, in, ws.delta[l + 1], ws.delta[l]);
    for (std::size_t j = 0; j < in; ++j) {
      const double a = ws.act[l][j];
      ws.delta[l][j] *= a * (1.0 - a);
    }
  }
}

double log_sum_exp(const Vector& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - zmax);
  return zmax + std::log(s);
}

void check_batch(const Architecture& arch, const BatchView& inputs, std::size_t n_targets) {
  if (inputs.rows == 0) throw ConfigError("empty batch");
  if (inputs.cols != arch.input_size())
    throw ConfigError("input width " + std::to_string(inputs.cols) + " does not match layer 0 size " +
                      std::to_string(arch.input_size()));
  if (inputs.data.size() != inputs.rows * inputs.cols) throw ConfigError("batch storage size mismatch");
  if (n_targets != inputs.rows) throw ConfigError("batch has mismatched input and target counts");
}

double xent_pass(const Architecture& arch, std::span<const double> params, const BatchView& inputs,
                 std::span<const int> labels, ParamVector* grad) {
  if (arch.head != OutputHead::softmax_xent) throw ConfigError("cross-entropy loss requires softmax head");
  check_params(arch, params);
  check_batch(arch, inputs, labels.size());
  const auto K = static_cast<int>(arch.output_size());
  Workspace ws(arch);
  if (grad) grad->assign(params.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < inputs.rows; ++i) {
    const int label = labels[i];
    if (label < 0 || label >= K) throw ConfigError("label " + std::to_string(label) + " outside [0, K)");
    forward_pass(arch, params, inputs.row(i), ws);
    Vector& z = ws.act.back();
    total += log_sum_exp(z) - z[static_cast<std::size_t>(label)];
    if (grad) {
      softmax_inplace(z);
      Vector& d = ws.delta.back();
      for (int k = 0; k < K; ++k) d[k] = z[k] - (k == label ? 1.0 : 0.0);
      backward_pass(arch, params, ws, *grad);
    }
  }
  const double inv = 1.0 / static_cast<double>(inputs.rows);
  if (grad)
    for (double& g : *grad) g *= inv;
  return total * inv;
}

}  // namespace

ForwardResult forward(const Architecture& arch, std::span<const double> params,
                      std::span<const double> input) {
  check_params(arch, params);
  if (input.size() != arch.input_size())
    throw ConfigError("input has " + std::to_string(input.size()) + " entries, layer 0 has " +
                      std::to_string(arch.input_size()));
  Workspace ws(arch);
  forward_pass(arch, params, input, ws);
  if (arch.head == OutputHead::softmax_xent) softmax_inplace(ws.act.back());
  return ForwardResult{std::move(ws.act)};
}

LossGrad loss_and_gradient(const Architecture& arch, std::span<const double> params,
                           const BatchView& inputs, std::span<const int> labels) {
  LossGrad out;
  out.loss = xent_pass(arch, params, inputs, labels, &out.grad);
  return out;
}

double loss_only(const Architecture& arch, std::span<const double> params, const BatchView& inputs,
                 std::span<const int> labels) {
  return xent_pass(arch, params, inputs, labels, nullptr);
}

LossGrad loss_and_gradient(const Architecture& arch, std::span<const double> params,
                           const BatchView& inputs, const BatchView& targets) {
  if (arch.head != OutputHead::identity) throw ConfigError("squared-error loss requires identity head");
  check_params(arch, params);
  check_batch(arch, inputs, targets.rows);
  if (targets.cols != arch.output_size()) throw ConfigError("target width does not match output layer");
  Workspace ws(arch);
  LossGrad out;
  out.grad.assign(params.size(), 0.0);
  for (std::size_t i = 0; i < inputs.rows; ++i) {
    forward_pass(arch, params, inputs.row(i), ws);
    const Vector& y_hat = ws.act.back();
    auto y = targets.row(i);
    Vector& d = ws.delta.back();
    for (std::size_t k = 0; k < y_hat.size(); ++k) {
      d[k] = y_hat[k] - y[k];
      out.loss += 0.5 * d[k] * d[k];
    }
    backward_pass(arch, params, ws, out.grad);
  }
  const double inv = 1.0 / static_cast<double>(inputs.rows);
  for (double& g : out.grad) g *= inv;
  out.loss *= inv;
  return out;
}

}  // namespace qgd
