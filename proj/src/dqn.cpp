#include "qgd/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "qgd/binary_io.hpp"
#include "qgd/error.hpp"

namespace qgd {

namespace io {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

void write_file(const std::string& path, std::string_view data) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!os) throw ConfigError("write failed for " + path);
}

}  // namespace io

const char* action_name(Action a) noexcept {
  switch (a) {
    case Action::half: return "half";
    case Action::double_rate: return "double";
    case Action::accept: return "accept";
  }
  return "?";
}

const char* variant_name(Variant v) noexcept { return v == Variant::v1 ? "v1" : "v2"; }

Action ActionSet::action(std::size_t index) const {
  if (index >= size()) throw CapabilityError("action index out of range");
  if (index == 0) return Action::half;
  if (variant_ == Variant::v2 && index == 1) return Action::double_rate;
  return Action::accept;
}

std::size_t ActionSet::index_of(Action a) const {
  switch (a) {
    case Action::half: return 0;
    case Action::double_rate:
      if (variant_ != Variant::v2) throw CapabilityError("action 'double' is not available to a v1 model");
      return 1;
    case Action::accept: return size() - 1;
  }
  throw CapabilityError("unknown action");
}

DqnModel DqnModel::create(Variant v, const FeatureScaling& scaling, double alpha_c,
                          std::vector<std::size_t> hidden) {
  DqnModel m;
  m.actions = ActionSet(v);
  m.arch.layer_sizes.push_back(kNumFeatures);
  for (auto h : hidden) m.arch.layer_sizes.push_back(h);
  m.arch.layer_sizes.push_back(m.actions.size());
  m.arch.head = OutputHead::identity;
  m.arch.validate();
  m.params.assign(m.arch.num_params(), 0.0);
  m.scaling = scaling;
  m.alpha_c = alpha_c;
  return m;
}

void glorot_init(DqnModel& model, Rng& rng) {
  const auto& a = model.arch;
  for (std::size_t l = 0; l + 1 < a.num_layers(); ++l) {
    const std::size_t in = a.layer_sizes[l], out = a.layer_sizes[l + 1];
    const double r = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> u(-r, r);
    const auto w = a.weight_offset(l);
    for (std::size_t i = 0; i < in * out; ++i) model.params[w + i] = u(rng);
    if (a.biases) std::fill_n(model.params.begin() + static_cast<std::ptrdiff_t>(a.bias_offset(l)), out, 0.0);
  }
}

Vector q_values(const DqnModel& model, const StateVector& state) {
  return forward(model.arch, model.params, state).output();
}

std::size_t greedy_action(std::span<const double> q) {
  if (q.empty()) throw ConfigError("no q-values");
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i)
    if (q[i] > q[best]) best = i;
  return best;
}

std::size_t select_action(const DqnModel& model, const StateVector& state, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, model.actions.size() - 1);
    return pick(rng);
  }
  return greedy_action(q_values(model, state));
}

QTarget build_target(const DqnModel& model, const Experience& e, double gamma) {
  QTarget t;
  t.action = e.action;
  t.estimate = q_values(model, e.state);
  if (e.action >= t.estimate.size()) throw ConfigError("experience action outside the model's action set");
  t.target = t.estimate;
  if (e.terminal && !e.all_action_rewards.empty()) {
    if (e.all_action_rewards.size() != t.target.size())
      throw ConfigError("per-action terminal rewards do not match the action set");
    t.target = e.all_action_rewards;
    return t;
  }
  double y = e.reward;
  if (!e.terminal) {
    const Vector next = q_values(model, e.next_state);
    y += gamma * *std::max_element(next.begin(), next.end());
  }
  t.target[e.action] = y;
  return t;
}

LossGrad minibatch_loss_gradient(const DqnModel& model, std::span<const Experience> batch, double gamma) {
  if (batch.empty()) throw ConfigError("empty mini-batch");
  const std::size_t width = model.actions.size();
  Vector inputs, targets;
  inputs.reserve(batch.size() * kNumFeatures);
  targets.reserve(batch.size() * width);
  for (const auto& e : batch) {
    const auto t = build_target(model, e, gamma);
    inputs.insert(inputs.end(), e.state.begin(), e.state.end());
    targets.insert(targets.end(), t.target.begin(), t.target.end());
  }
  return loss_and_gradient(model.arch, model.params, BatchView{inputs, batch.size(), kNumFeatures},
                           BatchView{targets, batch.size(), width});
}

double apply_minibatch(DqnModel& model, std::span<const Experience> batch, double gamma, DqnOptimizer& opt) {
  const auto lg = minibatch_loss_gradient(model, batch, gamma);
  auto& p = model.params;
  if (opt.kind == DqnOptimizerKind::sgd) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= opt.step * lg.grad[i];
  } else {
    if (opt.mean_square.size() != p.size()) opt.mean_square.assign(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = lg.grad[i];
      double& ms = opt.mean_square[i];
      ms = opt.decay * ms + (1.0 - opt.decay) * g * g;
      p[i] -= opt.step * g / (std::sqrt(ms) + opt.stabilizer);
    }
  }
  return lg.loss;
}

namespace {

constexpr std::string_view kMagic = "QGDM";
constexpr std::uint32_t kFormatVersion = 1;

bool is_reciprocal(std::size_t feature) {
  return feature == static_cast<std::size_t>(Feature::objective_value) ||
         feature == static_cast<std::size_t>(Feature::grad_dot_dir);
}

}  // namespace

std::string encode_model(const DqnModel& m) {
  io::Writer w;
  w.bytes(kMagic);
  w.u32(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(m.actions.variant()));
  w.f64(m.alpha_c);
  w.u32(static_cast<std::uint32_t>(m.arch.layer_sizes.size()));
  for (auto n : m.arch.layer_sizes) w.u32(static_cast<std::uint32_t>(n));
  for (const auto& r : m.scaling.ranges) {
    w.f64(r.min);
    w.f64(r.max);
    w.f64(r.shift);
  }
  for (double v : m.params) w.f64(v);
  return w.data();
}

DqnModel decode_model(std::string_view bytes) {
  io::Reader r(bytes);
  if (bytes.size() < kMagic.size() || r.bytes(kMagic.size()) != kMagic)
    throw FormatError("bad magic: not a QGDM model file");
  const auto version = r.u32();
  if (version != kFormatVersion) throw FormatError("unsupported model format version " + std::to_string(version));
  const auto tag = r.u8();
  if (tag != 1 && tag != 2) throw FormatError("unknown action-set tag " + std::to_string(tag));
  DqnModel m;
  m.actions = ActionSet(static_cast<Variant>(tag));
  m.alpha_c = r.f64();
  const auto layers = r.u32();
  if (layers < 2 || layers > 64) throw FormatError("implausible layer count");
  for (std::uint32_t i = 0; i < layers; ++i) m.arch.layer_sizes.push_back(r.u32());
  m.arch.head = OutputHead::identity;
  try {
    m.arch.validate();
  } catch (const ConfigError& e) {
    throw FormatError(e.what());
  }
  if (m.arch.input_size() != kNumFeatures) throw FormatError("model input width is not 6");
  if (m.arch.output_size() != m.actions.size()) throw FormatError("model output width does not match action set");
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    auto& fr = m.scaling.ranges[i];
    fr.min = r.f64();
    fr.max = r.f64();
    fr.shift = r.f64();
    fr.reciprocal = is_reciprocal(i);
  }
  const auto n = m.arch.num_params();
  if (r.remaining() != n * 8) throw FormatError("parameter block has wrong length");
  m.params.resize(n);
  for (auto& v : m.params) v = r.f64();
  return m;
}

void save_model(const DqnModel& model, const std::string& path) { io::write_file(path, encode_model(model)); }

DqnModel load_model(const std::string& path) { return decode_model(io::read_file(path)); }

}  // namespace qgd
