#include "qgd/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "qgd/binary_io.hpp"
#include "qgd/error.hpp"
#include "qgd/rewards.hpp"

namespace qgd {

double epsilon_at(std::size_t episode, const EpsilonSchedule& s) {
  if (s.decay_episodes == 0 || episode >= s.decay_episodes) return s.end;
  const double frac = static_cast<double>(episode) / static_cast<double>(s.decay_episodes);
  return s.start + (s.end - s.start) * frac;
}

void TrainConfig::validate() const {
  if (window < 1 || horizon <= window) throw ConfigError("train config needs T > M >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(c1 > 0.0 && c2 > 0.0)) throw ConfigError("reward constants c1, c2 must be positive");
  if (!(alpha_c > 0.0)) throw ConfigError("alpha_c must be positive");
  if (batch_size == 0) throw ConfigError("mini-batch size must be positive");
  if (batch_size < best_episodes) throw ConfigError("mini-batch must hold one draw per best episode");
  if (!(epsilon.start >= 0.0 && epsilon.start <= 1.0 && epsilon.end >= 0.0 && epsilon.end <= 1.0))
    throw ConfigError("epsilon schedule endpoints must lie in [0, 1]");
  if (variant == Variant::v2) {
    if (!alpha_bounds) throw ConfigError("v2 training requires alpha bounds");
    if (!(alpha_bounds->first < alpha_c && alpha_c < alpha_bounds->second))
      throw ConfigError("alpha bounds must satisfy alpha_min < alpha_c < alpha_max");
  }
  if (!(dqn_step >= 0.0)) throw ConfigError("dqn step must be non-negative");
}

double assign_reward(Action action, double f_candidate, double f_accepted, double f_lb, const TrainConfig& cfg) {
  if (action == Action::accept) return reward_id(f_accepted, f_lb, cfg.c2);
  return reward_id(f_candidate, f_lb, cfg.c1);
}

Trainer::Trainer(const ObjectiveFn& objective, TrainConfig cfg, DqnModel model, ParamVector x1)
    : objective_(objective),
      cfg_(std::move(cfg)),
      model_(std::move(model)),
      x1_(std::move(x1)),
      memory_(cfg_.recent_episodes, cfg_.best_episodes),
      rng_(cfg_.seed) {
  cfg_.validate();
  if (x1_.size() != objective_.num_params()) throw ConfigError("x_1 does not match the objective");
  opt_.kind = cfg_.optimizer;
  opt_.step = cfg_.dqn_step;
  opt_.decay = cfg_.rms_decay;
  opt_.stabilizer = cfg_.rms_stabilizer;
}

Trainer::Trainer(const ObjectiveFn& objective, TrainConfig cfg, FeatureScaling scaling, ParamVector x1)
    : Trainer(objective, cfg, DqnModel::create(cfg.variant, scaling, cfg.alpha_c, cfg.hidden), std::move(x1)) {
  glorot_init(model_, rng_);
}

EnvConfig Trainer::env_config() const {
  EnvConfig e;
  e.variant = cfg_.variant;
  e.alpha_c = cfg_.alpha_c;
  e.window = cfg_.window;
  e.horizon = cfg_.horizon;
  e.scaling = model_.scaling;
  e.alpha_bounds = cfg_.alpha_bounds;
  return e;
}

EpisodeResult Trainer::run_episode() {
  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  const std::size_t episode = next_episode_;
  const double eps = epsilon_at(episode, cfg_.epsilon);
  const double f_lb = objective_.lower_bound();
  const bool use_best = episode >= cfg_.best_enabled_after;

  QgdEnvironment env(objective_, env_config());
  if (env.reset(x1_) != StepStatus::ok) throw NumericError("objective diverged during warm-up steps");

  EpisodeResult result;
  result.record = std::make_shared<EpisodeRecord>();
  result.record->episode_id = static_cast<std::int64_t>(episode);
  memory_.clear_open();

  bool early = false;
  for (std::size_t t = cfg_.window; t <= cfg_.horizon; ++t) {
    const StateVector s = env.state();
    const std::size_t a_idx = select_action(model_, s, eps, rng_);
    const Action a = model_.actions.action(a_idx);
    const bool last = t == cfg_.horizon;

    std::vector<double> per_action;
    if (last) {
      // Every action's reward at the absorbing step.
      per_action.resize(model_.actions.size());
      for (std::size_t j = 0; j < per_action.size(); ++j) {
        const Action aj = model_.actions.action(j);
        if (j == a_idx) continue;
        if (aj == Action::accept) {
          per_action[j] = reward_id(env.f_candidate(), f_lb, cfg_.c2);
          continue;
        }
        const double alpha = env.next_alpha(aj);
        if (cfg_.alpha_bounds && (alpha < cfg_.alpha_bounds->first || alpha > cfg_.alpha_bounds->second)) {
          per_action[j] = -1.0;
          continue;
        }
        const double f = env.peek_objective(aj);
        per_action[j] = std::isfinite(f) ? reward_id(f, f_lb, cfg_.c1) : -1.0;
      }
    }

    const StepStatus status = env.step(a);
    Experience ex;
    ex.state = s;
    ex.action = a_idx;
    ex.episode_id = static_cast<std::int64_t>(episode);
    ex.step = static_cast<std::int64_t>(t);
    if (status != StepStatus::ok) {
      ex.reward = -1.0;
      ex.terminal = true;
      ex.next_state = s;
      early = !last;
    } else {
      ex.reward = assign_reward(a, env.f_candidate(), env.f_accepted(), f_lb, cfg_);
      ex.next_state = env.state();
      ex.terminal = last;
    }
    if (last) {
      per_action[a_idx] = ex.reward;
      ex.all_action_rewards = std::move(per_action);
    }
    result.actions.push_back(a_idx);
    result.rewards.push_back(ex.reward);
    result.record->experiences.push_back(ex);
    memory_.add_experience(std::move(ex));

    const bool best_now = use_best && !memory_.best().empty();
    const auto batch = memory_.sample_minibatch(cfg_.batch_size, best_now, rng_);
    if (on_minibatch) on_minibatch(episode, batch);
    apply_minibatch(model_, batch, cfg_.gamma, opt_);
    if (early) break;
  }

  const auto& trace = env.objective_trace();
  const std::size_t kept = std::min(trace.size(), cfg_.horizon);
  result.record->objective_trace.assign(trace.begin(), trace.begin() + static_cast<std::ptrdiff_t>(kept));
  result.record->rmax = episode_rmax(result.rewards, cfg_.gamma);
  memory_.commit_episode(result.record);
  memory_.clear_open();

  auto& row = result.log;
  row.episode = episode;
  row.rmax = result.record->rmax;
  row.final_f = result.record->objective_trace.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                       : result.record->objective_trace.back();
  row.epsilon = eps;
  row.steps = result.rewards.size();
  row.terminated_early = early;
  if (cfg_.record_wall_time)
    row.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - started).count();
  log_.push_back(row);
  ++next_episode_;
  return result;
}

void Trainer::train(const std::function<void(const EpisodeResult&)>& on_episode, std::size_t checkpoint_every,
                    const std::string& checkpoint_prefix) {
  while (next_episode_ < cfg_.episodes) {
    const auto r = run_episode();
    if (on_episode) on_episode(r);
    if (checkpoint_every > 0 && next_episode_ % checkpoint_every == 0 && next_episode_ < cfg_.episodes) {
      const std::string base = checkpoint_prefix + std::to_string(next_episode_);
      save_checkpoint(base + ".qgdm", base + ".state");
    }
  }
}

namespace {

constexpr std::string_view kStateMagic = "QGDS";
constexpr std::uint32_t kStateVersion = 1;

void put_state(io::Writer& w, const StateVector& s) {
  for (double v : s) w.f64(v);
}

StateVector get_state(io::Reader& r) {
  StateVector s{};
  for (double& v : s) v = r.f64();
  return s;
}

void put_experience(io::Writer& w, const Experience& e) {
  put_state(w, e.state);
  w.u64(e.action);
  w.f64(e.reward);
  put_state(w, e.next_state);
  w.u8(e.terminal ? 1 : 0);
  w.i64(e.episode_id);
  w.i64(e.step);
  w.u64(e.all_action_rewards.size());
  for (double v : e.all_action_rewards) w.f64(v);
}

Experience get_experience(io::Reader& r) {
  Experience e;
  e.state = get_state(r);
  e.action = r.u64();
  e.reward = r.f64();
  e.next_state = get_state(r);
  e.terminal = r.u8() != 0;
  e.episode_id = r.i64();
  e.step = r.i64();
  const auto n = r.u64();
  if (n > 16) throw FormatError("implausible per-action reward count");
  e.all_action_rewards.resize(n);
  for (double& v : e.all_action_rewards) v = r.f64();
  return e;
}

}  // namespace

void Trainer::save_checkpoint(const std::string& model_path, const std::string& state_path) const {
  save_model(model_, model_path);
  io::Writer w;
  w.bytes(kStateMagic);
  w.u32(kStateVersion);
  w.u64(next_episode_);
  std::ostringstream rng_text;
  rng_text << rng_;
  w.str(rng_text.str());
  w.u64(opt_.mean_square.size());
  for (double v : opt_.mean_square) w.f64(v);

  w.u64(log_.size());
  for (const auto& row : log_) {
    w.u64(row.episode);
    w.f64(row.rmax);
    w.f64(row.final_f);
    w.f64(row.epsilon);
    w.f64(row.wall_ms);
    w.u64(row.steps);
    w.u8(row.terminated_early ? 1 : 0);
  }

  std::vector<const EpisodeRecord*> episodes;
  auto index_of = [&episodes](const EpisodeRecord* p) {
    for (std::size_t i = 0; i < episodes.size(); ++i)
      if (episodes[i] == p) return i;
    episodes.push_back(p);
    return episodes.size() - 1;
  };
  std::vector<std::size_t> recent_idx, best_idx;
  for (const auto& p : memory_.recent()) recent_idx.push_back(index_of(p.get()));
  for (const auto& p : memory_.best()) best_idx.push_back(index_of(p.get()));
  w.u64(episodes.size());
  for (const auto* ep : episodes) {
    w.i64(ep->episode_id);
    w.f64(ep->rmax);
    w.u64(ep->objective_trace.size());
    for (double v : ep->objective_trace) w.f64(v);
    w.u64(ep->experiences.size());
    for (const auto& e : ep->experiences) put_experience(w, e);
  }
  w.u64(recent_idx.size());
  for (auto i : recent_idx) w.u64(i);
  w.u64(best_idx.size());
  for (auto i : best_idx) w.u64(i);
  io::write_file(state_path, w.data());
}

Trainer Trainer::resume(const ObjectiveFn& objective, TrainConfig cfg, ParamVector x1, const std::string& model_path,
                        const std::string& state_path) {
  DqnModel model = load_model(model_path);
  if (model.actions.variant() != cfg.variant) throw ConfigError("checkpoint model variant does not match config");
  Trainer tr(objective, std::move(cfg), std::move(model), std::move(x1));

  const std::string bytes = io::read_file(state_path);
  io::Reader r(bytes);
  if (bytes.size() < kStateMagic.size() || r.bytes(kStateMagic.size()) != kStateMagic)
    throw FormatError("bad magic: not a trainer state file");
  if (r.u32() != kStateVersion) throw FormatError("unsupported trainer state version");
  tr.next_episode_ = r.u64();
  std::istringstream rng_text(r.str());
  rng_text >> tr.rng_;
  if (!rng_text) throw FormatError("corrupt random-number state");
  tr.opt_.mean_square.resize(r.u64());
  for (double& v : tr.opt_.mean_square) v = r.f64();

  const auto n_log = r.u64();
  for (std::uint64_t i = 0; i < n_log; ++i) {
    TrainLogRow row;
    row.episode = r.u64();
    row.rmax = r.f64();
    row.final_f = r.f64();
    row.epsilon = r.f64();
    row.wall_ms = r.f64();
    row.steps = r.u64();
    row.terminated_early = r.u8() != 0;
    tr.log_.push_back(row);
  }

  std::vector<EpisodePtr> episodes(r.u64());
  for (auto& ep : episodes) {
    auto rec = std::make_shared<EpisodeRecord>();
    rec->episode_id = r.i64();
    rec->rmax = r.f64();
    rec->objective_trace.resize(r.u64());
    for (double& v : rec->objective_trace) v = r.f64();
    const auto n_exp = r.u64();
    for (std::uint64_t i = 0; i < n_exp; ++i) rec->experiences.push_back(get_experience(r));
    ep = std::move(rec);
  }
  auto read_index = [&]() {
    const auto i = r.u64();
    if (i >= episodes.size()) throw FormatError("episode index out of range");
    return episodes[i];
  };
  std::deque<EpisodePtr> recent(r.u64());
  for (auto& p : recent) p = read_index();
  std::vector<EpisodePtr> best(r.u64());
  for (auto& p : best) p = read_index();
  if (!r.at_end()) throw FormatError("trailing bytes in trainer state");
  tr.memory_.restore(std::move(recent), std::move(best));
  return tr;
}

void write_train_log(const std::vector<TrainLogRow>& log, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os << "episode,rmax,final_f,epsilon,wall_ms\n";
  char buf[256];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.3f\n", r.episode, r.rmax, r.final_f, r.epsilon,
                  r.wall_ms);
    os << buf;
  }
}

}  // namespace qgd
