#include "qgd/objective.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "qgd/error.hpp"

namespace qgd {

void Dataset::validate() const {
  if (n == 0) throw ValidationError("dataset has no samples");
  if (k == 0 || d == 0) throw ValidationError("dataset dimensions must be positive");
  if (inputs.size() != n * d || labels.size() != n) throw ValidationError("dataset storage size mismatch");
  for (std::size_t i = 0; i < inputs.size(); ++i)
    if (std::isnan(inputs[i])) throw ValidationError("NaN input in row " + std::to_string(i / d + 1));
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k)
      throw ValidationError("label " + std::to_string(labels[i]) + " in row " + std::to_string(i + 1) +
                            " is outside [0, " + std::to_string(k) + ")");
}

std::uint64_t Dataset::checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(seed);
  mix(n);
  mix(d);
  mix(k);
  for (double v : inputs) mix(std::bit_cast<std::uint64_t>(v));
  for (int l : labels) mix(static_cast<std::uint64_t>(l));
  return h;
}

Dataset generate_dataset(std::uint64_t seed, std::size_t n, std::size_t d, std::size_t k,
                         double cluster_spread) {
  if (k < 2 || n < k || d < 1) throw ConfigError("generate_dataset requires N >= K >= 2 and d >= 1");
  if (!(cluster_spread >= 0.0) || !std::isfinite(cluster_spread))
    throw ConfigError("cluster spread must be finite and non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> center_dist(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  Vector centers(k * d);
  for (double& c : centers) c = center_dist(rng);

  Dataset out;
  out.seed = seed;
  out.n = n;
  out.d = d;
  out.k = k;
  out.inputs.resize(n * d);
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % k;
    out.labels[i] = static_cast<int>(c);
    for (std::size_t j = 0; j < d; ++j) out.inputs[i * d + j] = centers[c * d + j] + cluster_spread * noise(rng);
  }
  return out;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  data.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  os << "# qgd-dataset v1, seed=" << data.seed << ", N=" << data.n << ", d=" << data.d << ", K=" << data.k
     << '\n';
  char buf[64];
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t j = 0; j < data.d; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.inputs[i * data.d + j]);
      os << buf << ',';
    }
    os << data.labels[i] << '\n';
  }
  if (!os) throw ConfigError("write failed for " + path.string());
}

namespace {

template <typename T>
T parse_number(std::string_view tok, std::size_t line, const char* what) {
  T v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError(std::string("malformed ") + what + " '" + std::string(tok) + "'", line);
  return v;
}

std::string_view header_field(std::string_view header, std::string_view key, std::size_t line) {
  while (!header.empty()) {
    const auto comma = header.find(',');
    auto field = header.substr(0, comma);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    const auto eq = field.find('=');
    if (eq != std::string_view::npos && field.substr(0, eq) == key) return field.substr(eq + 1);
    if (comma == std::string_view::npos) break;
    header.remove_prefix(comma + 1);
  }
  throw ParseError("header missing '" + std::string(key) + "='", line);
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open dataset " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty dataset file", 1);
  const std::string_view prefix = "# qgd-dataset v1, ";
  if (line.rfind(prefix, 0) != 0) throw ParseError("missing '# qgd-dataset v1' header", 1);

  Dataset out;
  out.seed = parse_number<std::uint64_t>(header_field(line, "seed", 1), 1, "seed");
  out.n = parse_number<std::size_t>(header_field(line, "N", 1), 1, "N");
  out.d = parse_number<std::size_t>(header_field(line, "d", 1), 1, "d");
  out.k = parse_number<std::size_t>(header_field(line, "K", 1), 1, "K");
  if (out.n == 0 || out.d == 0 || out.k == 0) throw ParseError("header sizes must be positive", 1);
  out.inputs.reserve(out.n * out.d);
  out.labels.reserve(out.n);

  std::size_t lineno = 1;
  for (std::size_t row = 0; row < out.n; ++row) {
    ++lineno;
    if (!std::getline(is, line))
      throw ParseError("truncated dataset: expected " + std::to_string(out.n) + " rows, found " +
                           std::to_string(row),
                       lineno);
    std::string_view rest(line);
    for (std::size_t j = 0; j < out.d; ++j) {
      const auto comma = rest.find(',');
      if (comma == std::string_view::npos) throw ParseError("row has too few fields", lineno);
      out.inputs.push_back(parse_number<double>(rest.substr(0, comma), lineno, "float"));
      rest.remove_prefix(comma + 1);
    }
    if (rest.find(',') != std::string_view::npos) throw ParseError("row has too many fields", lineno);
    const int label = parse_number<int>(rest, lineno, "label");
    if (label < 0 || static_cast<std::size_t>(label) >= out.k)
      throw ValidationError("label " + std::to_string(label) + " in row " + std::to_string(row + 1) +
                            " is outside [0, " + std::to_string(out.k) + ")");
    out.labels.push_back(label);
  }
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty()) throw ParseError("unexpected data after final row", lineno);
  }
  out.validate();
  return out;
}

ObjectiveFn::ObjectiveFn(Architecture arch, std::shared_ptr<const Dataset> data, double f_lb)
    : arch_(std::move(arch)), data_(std::move(data)), f_lb_(f_lb) {
  arch_.validate();
  if (!data_) throw ConfigError("objective requires a dataset");
  if (arch_.head != OutputHead::softmax_xent) throw ConfigError("objective network must use a softmax head");
  if (arch_.input_size() != data_->d) throw ConfigError("network input width does not match dataset d");
  if (arch_.output_size() != data_->k) throw ConfigError("network output width does not match dataset K");
  data_->validate();
}

double ObjectiveFn::evaluate(std::span<const double> x) const {
  return loss_only(arch_, x, data_->batch(), data_->labels);
}

ParamVector ObjectiveFn::gradient(std::span<const double> x) const {
  return loss_and_gradient(arch_, x, data_->batch(), data_->labels).grad;
}

LossGrad ObjectiveFn::evaluate_with_gradient(std::span<const double> x) const {
  return loss_and_gradient(arch_, x, data_->batch(), data_->labels);
}

ParamVector initial_iterate(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  ParamVector x(arch.num_params());
  for (std::size_t l = 0; l + 1 < arch.num_layers(); ++l) {
    const std::size_t in = arch.layer_sizes[l], out = arch.layer_sizes[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    const std::size_t begin = arch.weight_offset(l);
    const std::size_t count = (in + (arch.biases ? 1 : 0)) * out;
    for (std::size_t i = begin; i < begin + count; ++i) x[i] = u(rng) * scale;
  }
  return x;
}

}  // namespace qgd
