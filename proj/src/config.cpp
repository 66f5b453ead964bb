#include "qgd/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "qgd/error.hpp"

namespace qgd {

namespace pt = boost::property_tree;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RunConfig desk_profile() {
  RunConfig c;
  c.train_v1.variant = Variant::v1;
  c.train_v1.episodes = 2000;
  c.train_v1.alpha_c = 4.0;
  c.train_v1.optimizer = DqnOptimizerKind::sgd;
  c.train_v1.dqn_step = 0.01;

  c.train_v2 = c.train_v1;
  c.train_v2.variant = Variant::v2;
  c.train_v2.episodes = 5000;
  c.train_v2.alpha_c = 2.0;
  c.train_v2.alpha_bounds = std::pair{0.01, 8.0};
  c.train_v2.optimizer = DqnOptimizerKind::rmsprop;
  c.train_v2.dqn_step = 0.001;

  c.armijo.c = 1e-4;
  c.armijo.window = 1;
  c.armijo.alpha_c = c.train_v1.alpha_c;
  c.armijo.budget = c.train_v1.horizon;
  return c;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(xs[i]);
  }
  return s;
}

template <typename T>
std::vector<T> split_numbers(const std::string& text, const std::string& key) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto b = tok.find_first_not_of(" \t");
    const auto e = tok.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("empty entry in list '" + key + "'");
    tok = tok.substr(b, e - b + 1);
    try {
      std::size_t pos = 0;
      if constexpr (std::is_floating_point_v<T>) {
        out.push_back(static_cast<T>(std::stod(tok, &pos)));
      } else {
        if (!tok.empty() && tok[0] == '-') throw ConfigError("negative value in '" + key + "'");
        out.push_back(static_cast<T>(std::stoull(tok, &pos)));
      }
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("malformed number '" + tok + "' in '" + key + "'");
    }
  }
  return out;
}

class Section {
 public:
  Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (auto child = root.get_child_optional(name_)) tree_ = &*child;
  }

  template <typename T>
  void get(const char* key, T& out) const {
    if (!tree_) return;
    auto v = tree_->get_optional<std::string>(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (*v == "true" || *v == "1" || *v == "yes") out = true;
        else if (*v == "false" || *v == "0" || *v == "no") out = false;
        else throw std::invalid_argument(*v);
      } else if constexpr (std::is_same_v<T, std::string>) {
        out = *v;
      } else if constexpr (std::is_floating_point_v<T>) {
        std::size_t pos = 0;
        out = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument(*v);
      } else {
        std::size_t pos = 0;
        if (!v->empty() && (*v)[0] == '-') throw std::invalid_argument(*v);
        out = static_cast<T>(std::stoull(*v, &pos));
        if (pos != v->size()) throw std::invalid_argument(*v);
      }
    } catch (const std::exception&) {
      throw ConfigError("bad value '" + *v + "' for [" + name_ + "] " + key);
    }
  }

  template <typename T>
  void get_list(const char* key, std::vector<T>& out) const {
    if (!tree_) return;
    if (auto v = tree_->get_optional<std::string>(key)) out = split_numbers<T>(*v, key);
  }

  std::optional<std::string> raw(const char* key) const {
    if (!tree_) return std::nullopt;
    if (auto v = tree_->get_optional<std::string>(key)) return *v;
    return std::nullopt;
  }

  bool present() const { return tree_ != nullptr; }

 private:
  std::string name_;
  const pt::ptree* tree_ = nullptr;
};

void read_train(const Section& s, TrainConfig& t) {
  s.get("episodes", t.episodes);
  s.get("horizon", t.horizon);
  s.get("window", t.window);
  s.get("gamma", t.gamma);
  s.get("epsilon_start", t.epsilon.start);
  s.get("epsilon_end", t.epsilon.end);
  s.get("epsilon_decay_episodes", t.epsilon.decay_episodes);
  s.get("recent_episodes", t.recent_episodes);
  s.get("best_episodes", t.best_episodes);
  s.get("batch_size", t.batch_size);
  s.get("best_enabled_after", t.best_enabled_after);
  s.get("c1", t.c1);
  s.get("c2", t.c2);
  s.get("alpha_c", t.alpha_c);
  if (auto lo = s.raw("alpha_min"), hi = s.raw("alpha_max"); lo || hi) {
    if (!lo || !hi) throw ConfigError("alpha_min and alpha_max must be given together");
    auto b = t.alpha_bounds.value_or(std::pair{0.0, 0.0});
    s.get("alpha_min", b.first);
    s.get("alpha_max", b.second);
    t.alpha_bounds = b;
  }
  if (auto o = s.raw("optimizer")) {
    if (*o == "sgd") t.optimizer = DqnOptimizerKind::sgd;
    else if (*o == "rmsprop") t.optimizer = DqnOptimizerKind::rmsprop;
    else throw ConfigError("optimizer must be sgd or rmsprop");
  }
  s.get("dqn_step", t.dqn_step);
  s.get("rms_decay", t.rms_decay);
  s.get("rms_stabilizer", t.rms_stabilizer);
  s.get_list("hidden", t.hidden);
  s.get("record_wall_time", t.record_wall_time);
}

void write_train(pt::ptree& s, const TrainConfig& t) {
  s.put("episodes", t.episodes);
  s.put("horizon", t.horizon);
  s.put("window", t.window);
  s.put("gamma", fmt_double(t.gamma));
  s.put("epsilon_start", fmt_double(t.epsilon.start));
  s.put("epsilon_end", fmt_double(t.epsilon.end));
  s.put("epsilon_decay_episodes", t.epsilon.decay_episodes);
  s.put("recent_episodes", t.recent_episodes);
  s.put("best_episodes", t.best_episodes);
  s.put("batch_size", t.batch_size);
  s.put("best_enabled_after", t.best_enabled_after);
  s.put("c1", fmt_double(t.c1));
  s.put("c2", fmt_double(t.c2));
  s.put("alpha_c", fmt_double(t.alpha_c));
  if (t.alpha_bounds) {
    s.put("alpha_min", fmt_double(t.alpha_bounds->first));
    s.put("alpha_max", fmt_double(t.alpha_bounds->second));
  }
  s.put("optimizer", t.optimizer == DqnOptimizerKind::sgd ? "sgd" : "rmsprop");
  s.put("dqn_step", fmt_double(t.dqn_step));
  s.put("rms_decay", fmt_double(t.rms_decay));
  s.put("rms_stabilizer", fmt_double(t.rms_stabilizer));
  s.put("hidden", join(t.hidden));
  s.put("record_wall_time", t.record_wall_time ? "true" : "false");
}

constexpr Feature kCalibrated[] = {Feature::learning_rate, Feature::objective_value, Feature::grad_dot_dir};

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  pt::ptree root;
  try {
    std::istringstream is(text);
    pt::read_ini(is, root);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(std::string("config: ") + e.message(), e.line());
  }
  for (const auto& [name, _] : root) {
    static const char* known[] = {"run", "objective", "train", "train_v1", "train_v2", "linesearch",
                                  "generalize", "ablation", "scaling"};
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return name == k; }) ==
        std::end(known))
      throw ConfigError("unknown config section [" + name + "]");
  }

  RunConfig c = desk_profile();
  const Section run(root, "run");
  run.get("seed", c.seed);
  run.get_list("seeds", c.seeds);
  run.get("out", c.out_dir);

  const Section obj(root, "objective");
  obj.get_list("layers", c.objective.layers);
  obj.get("n", c.objective.n);
  obj.get("spread", c.objective.spread);
  obj.get("biases", c.objective.biases);
  obj.get("f_lb", c.objective.f_lb);
  obj.get("dataset", c.objective.dataset_path);
  Architecture{c.objective.layers}.validate();

  const Section shared(root, "train");
  read_train(shared, c.train_v1);
  read_train(shared, c.train_v2);
  read_train(Section(root, "train_v1"), c.train_v1);
  read_train(Section(root, "train_v2"), c.train_v2);
  c.train_v1.variant = Variant::v1;
  c.train_v2.variant = Variant::v2;
  shared.get("checkpoint_every", c.checkpoint_every);

  c.armijo.alpha_c = c.train_v1.alpha_c;
  c.armijo.budget = c.train_v1.horizon;
  const Section ls(root, "linesearch");
  ls.get("c", c.armijo.c);
  ls.get("alpha_c", c.armijo.alpha_c);
  ls.get("budget", c.armijo.budget);
  ls.get("shrink", c.armijo.shrink);
  ls.get("nonmonotone_window", c.nonmonotone_window);

  const Section gen(root, "generalize");
  gen.get("data_factor", c.generalize.data_factor);
  gen.get("width_factor", c.generalize.width_factor);
  gen.get("horizon_factor", c.generalize.horizon_factor);

  Section(root, "ablation").get_list("seeds", c.ablation_seeds);

  const Section sc(root, "scaling");
  if (sc.present()) {
    FeatureScaling s = FeatureScaling::with_fixed_ranges(c.objective.f_lb, c.train_v1.window, c.train_v1.horizon);
    for (Feature f : kCalibrated) {
      const auto v = sc.raw(feature_name(f));
      if (!v) throw ConfigError(std::string("[scaling] is missing ") + feature_name(f));
      const auto mm = split_numbers<double>(*v, feature_name(f));
      if (mm.size() != 2) throw ConfigError(std::string("[scaling] ") + feature_name(f) + " needs min,max");
      s[f].min = mm[0];
      s[f].max = mm[1];
    }
    s.validate();
    c.scaling = s;
  }

  c.train_v1.validate();
  c.train_v2.validate();
  if (c.seeds.empty()) throw ConfigError("[run] seeds must not be empty");
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  return parse_run_config(std::string(std::istreambuf_iterator<char>(is), {}));
}

std::string format_run_config(const RunConfig& c) {
  pt::ptree root;
  auto& run = root.put_child("run", {});
  run.put("seed", c.seed);
  run.put("seeds", join(c.seeds));
  run.put("out", c.out_dir);

  auto& obj = root.put_child("objective", {});
  obj.put("layers", join(c.objective.layers));
  obj.put("n", c.objective.n);
  obj.put("spread", fmt_double(c.objective.spread));
  obj.put("biases", c.objective.biases ? "true" : "false");
  obj.put("f_lb", fmt_double(c.objective.f_lb));
  if (!c.objective.dataset_path.empty()) obj.put("dataset", c.objective.dataset_path);

  auto& shared = root.put_child("train", {});
  shared.put("checkpoint_every", c.checkpoint_every);
  write_train(root.put_child("train_v1", {}), c.train_v1);
  write_train(root.put_child("train_v2", {}), c.train_v2);

  auto& ls = root.put_child("linesearch", {});
  ls.put("c", fmt_double(c.armijo.c));
  ls.put("alpha_c", fmt_double(c.armijo.alpha_c));
  ls.put("budget", c.armijo.budget);
  ls.put("shrink", fmt_double(c.armijo.shrink));
  ls.put("nonmonotone_window", c.nonmonotone_window);

  auto& gen = root.put_child("generalize", {});
  gen.put("data_factor", c.generalize.data_factor);
  gen.put("width_factor", c.generalize.width_factor);
  gen.put("horizon_factor", c.generalize.horizon_factor);

  root.put_child("ablation", {}).put("seeds", join(c.ablation_seeds));

  if (c.scaling) {
    auto& sc = root.put_child("scaling", {});
    for (Feature f : kCalibrated)
      sc.put(feature_name(f), fmt_double((*c.scaling)[f].min) + "," + fmt_double((*c.scaling)[f].max));
  }
  std::ostringstream os;
  pt::write_ini(os, root);
  return os.str();
}

}  // namespace qgd
