#include "qgd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "qgd/environment.hpp"
#include "qgd/error.hpp"
#include "qgd/stats.hpp"

namespace qgd {

SeedContext make_context(const RunConfig& cfg, std::uint64_t seed, std::size_t data_factor,
                         std::size_t width_factor) {
  if (data_factor == 0 || width_factor == 0) throw ConfigError("scale factors must be positive");
  Architecture arch;
  arch.layer_sizes = cfg.objective.layers;
  for (std::size_t l = 1; l + 1 < arch.layer_sizes.size(); ++l) arch.layer_sizes[l] *= width_factor;
  arch.head = OutputHead::softmax_xent;
  arch.biases = cfg.objective.biases;
  arch.validate();

  SeedContext ctx;
  ctx.seed = seed;
  if (!cfg.objective.dataset_path.empty() && data_factor == 1) {
    ctx.data = std::make_shared<const Dataset>(load_dataset(cfg.objective.dataset_path));
  } else {
    ctx.data = std::make_shared<const Dataset>(generate_dataset(derive_seed(seed, data_stream),
                                                                cfg.objective.n * data_factor, cfg.objective.d(),
                                                                cfg.objective.k(), cfg.objective.spread));
  }
  ctx.objective = std::make_shared<const ObjectiveFn>(arch, ctx.data, cfg.objective.f_lb);
  ctx.x1 = initial_iterate(arch, derive_seed(seed, init_stream));
  return ctx;
}

std::pair<double, double> widen_range(double lo, double hi) {
  if (!(hi - lo > 1e-12 * std::max(1.0, std::abs(hi)))) {
    const double v = 0.5 * (lo + hi);
    const double half = 0.5 * std::max(std::abs(v), 1e-3);
    lo = v - half;
    hi = v + half;
  }
  const double pad = 0.1 * (hi - lo);
  return {lo - pad, hi + pad};
}

Calibration calibrate(const ObjectiveFn& objective, std::span<const double> x1, const LineSearchConfig& armijo,
                      std::size_t window, std::size_t horizon) {
  Calibration out;
  const double f_lb = objective.lower_bound();
  linesearch_gd(objective, armijo, x1, [&](const LineSearchObservation& o) {
    if (!std::isfinite(o.f_candidate)) return;
    out.observed.push_back({o.alpha, reciprocal_shift(o.f_candidate, f_lb), reciprocal_shift(std::abs(o.g_dot_d), 0.0)});
  });
  if (out.observed.empty()) throw NumericError("calibration run produced no finite evaluations");
  out.scaling = FeatureScaling::with_fixed_ranges(f_lb, window, horizon);
  const Feature targets[] = {Feature::learning_rate, Feature::objective_value, Feature::grad_dot_dir};
  for (std::size_t j = 0; j < 3; ++j) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& o : out.observed) {
      lo = std::min(lo, o[j]);
      hi = std::max(hi, o[j]);
    }
    const auto [a, b] = widen_range(lo, hi);
    out.scaling[targets[j]].min = a;
    out.scaling[targets[j]].max = b;
  }
  out.scaling.validate();
  return out;
}

FeatureScaling training_scaling(const RunConfig& cfg, const SeedContext& ctx, Variant v) {
  const TrainConfig& tc = cfg.train(v);
  FeatureScaling s;
  if (cfg.scaling) {
    s = *cfg.scaling;
  } else {
    auto ls = cfg.linesearch(1);
    ls.budget = tc.horizon;
    s = calibrate(*ctx.objective, ctx.x1, ls, tc.window, tc.horizon).scaling;
  }
  const FeatureScaling fixed = FeatureScaling::with_fixed_ranges(ctx.objective->lower_bound(), tc.window, tc.horizon);
  for (Feature f : {Feature::encoding, Feature::eval_count, Feature::alignment}) s[f] = fixed[f];
  if (tc.alpha_bounds) {
    auto& lr = s[Feature::learning_rate];
    lr.min = std::min(lr.min, tc.alpha_bounds->first);
    lr.max = std::max(lr.max, tc.alpha_bounds->second);
  }
  s.validate();
  return s;
}

TrainConfig seeded_train_config(const RunConfig& cfg, Variant v, std::uint64_t seed) {
  TrainConfig t = cfg.train(v);
  t.seed = derive_seed(seed, dqn_stream + (v == Variant::v2 ? 100 : 0));
  return t;
}

void append_episode_dump(const EpisodeResult& r, std::size_t window, std::vector<EpisodeDumpRow>& out) {
  const auto& trace = r.record->objective_trace;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const std::size_t step = i + 1;
    EpisodeDumpRow row{r.record->episode_id, step, trace[i], "warmup", std::nullopt};
    if (step >= window) {
      const std::size_t k = step - window;
      if (k < r.actions.size()) {
        row.action = r.record->experiences[k].action == 0 ? "half" : "";
        row.reward = r.rewards[k];
      } else {
        row.action = "none";
      }
    }
    out.push_back(std::move(row));
  }
}

TrainOutcome train_model(const RunConfig& cfg, const SeedContext& ctx, Variant variant,
                         const FeatureScaling& scaling, bool keep_episode_dump) {
  const TrainConfig tc = seeded_train_config(cfg, variant, ctx.seed);
  Trainer trainer(*ctx.objective, tc, scaling, ctx.x1);
  TrainOutcome out;
  trainer.train([&](const EpisodeResult& r) {
    if (!keep_episode_dump) return;
    append_episode_dump(r, tc.window, out.episodes);
    // Resolve action names with the model's action set.
    const std::size_t first = out.episodes.size() - r.record->objective_trace.size();
    for (std::size_t i = first; i < out.episodes.size(); ++i) {
      auto& row = out.episodes[i];
      if (row.step >= tc.window && row.step - tc.window < r.actions.size())
        row.action = action_name(trainer.model().actions.action(r.actions[row.step - tc.window]));
    }
  });
  out.model = trainer.model();
  out.log = trainer.log();
  return out;
}

void write_episode_dump(const std::vector<EpisodeDumpRow>& rows, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os << "episode_id,step,f_value,action,reward\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%lld,%zu,%.17g,%s,", static_cast<long long>(r.episode), r.step, r.f,
                  r.action.c_str());
    os << buf;
    if (r.reward) {
      std::snprintf(buf, sizeof buf, "%.17g", *r.reward);
      os << buf;
    }
    os << '\n';
  }
}

std::vector<EpisodeDumpRow> read_episode_dump(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open episode dump " + path);
  std::string line;
  if (!std::getline(is, line) || line != "episode_id,step,f_value,action,reward")
    throw ParseError("missing episode dump header", 1);
  std::vector<EpisodeDumpRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string ep, step, f, action, reward;
    if (!std::getline(ss, ep, ',') || !std::getline(ss, step, ',') || !std::getline(ss, f, ',') ||
        !std::getline(ss, action, ','))
      throw ParseError("episode dump row needs 5 fields", lineno);
    std::getline(ss, reward);
    EpisodeDumpRow r;
    try {
      r.episode = std::stoll(ep);
      r.step = std::stoul(step);
      r.f = std::stod(f);
      if (!reward.empty()) r.reward = std::stod(reward);
    } catch (const std::exception&) {
      throw ParseError("malformed number in episode dump", lineno);
    }
    r.action = action;
    rows.push_back(std::move(r));
  }
  return rows;
}

ComparisonRow summarize(const OptRunTrace& tr) {
  ComparisonRow r;
  r.optimizer = tr.optimizer;
  r.initial_f = tr.steps.empty() ? std::numeric_limits<double>::quiet_NaN() : tr.steps.front().f;
  r.final_f = tr.final_f;
  r.halving_frequency = tr.halving_frequency();
  r.halves = tr.halves;
  r.doubles = tr.doubles;
  r.accepts = tr.accepts;
  r.evaluations = tr.evaluations;
  r.diverged = tr.diverged;
  r.min_alpha = std::numeric_limits<double>::infinity();
  r.max_alpha = 0.0;
  for (const auto& s : tr.steps) {
    r.min_alpha = std::min(r.min_alpha, s.alpha);
    r.max_alpha = std::max(r.max_alpha, s.alpha);
  }
  return r;
}

const ComparisonRow& ComparisonReport::row(const std::string& optimizer) const {
  for (const auto& r : rows)
    if (r.optimizer == optimizer) return r;
  throw ConfigError("no comparison row for optimizer '" + optimizer + "'");
}

ComparisonReport compare_optimizers(const RunConfig& cfg, const ObjectiveFn& objective, std::span<const double> x1,
                                    const DqnModel* v1, const DqnModel* v2, std::size_t horizon) {
  ComparisonReport rep;
  const std::size_t window = cfg.train_v1.window;
  if (v1) rep.traces.push_back(qgd_run(objective, *v1, x1, horizon, window));
  if (v2) rep.traces.push_back(qgd_run(objective, *v2, x1, horizon, window));
  auto ls = cfg.linesearch(1);
  ls.budget = horizon;
  rep.traces.push_back(linesearch_gd(objective, ls, x1));
  ls.window = cfg.nonmonotone_window;
  rep.traces.push_back(linesearch_gd(objective, ls, x1));
  rep.traces.push_back(fixed_gd(objective, cfg.armijo.alpha_c, x1, horizon));
  for (const auto& t : rep.traces) rep.rows.push_back(summarize(t));
  return rep;
}

QValueTrace qvalue_trace(const ObjectiveFn& objective, std::span<const double> x1, const DqnModel& model,
                         const TrainConfig& train) {
  EnvConfig ec;
  ec.variant = model.actions.variant();
  ec.alpha_c = model.alpha_c;
  ec.window = train.window;
  ec.horizon = train.horizon;
  ec.scaling = model.scaling;
  ec.alpha_bounds = train.alpha_bounds;
  QgdEnvironment env(objective, ec);
  if (env.reset(x1) != StepStatus::ok) throw NumericError("objective diverged during warm-up steps");

  QValueTrace out;
  const double f_lb = objective.lower_bound();
  for (std::size_t t = train.window; t <= train.horizon; ++t) {
    const Vector q = q_values(model, env.state());
    const std::size_t a_idx = greedy_action(q);
    const Action a = model.actions.action(a_idx);
    const StepStatus st = env.step(a);
    out.t.push_back(t);
    out.action.push_back(a_idx);
    out.q.push_back(q[a_idx]);
    if (st != StepStatus::ok) {
      out.reward.push_back(-1.0);
      break;
    }
    out.reward.push_back(assign_reward(a, env.f_candidate(), env.f_accepted(), f_lb, train));
  }
  out.discounted_return = discounted_returns(out.reward, train.gamma);
  out.correlation = out.q.size() >= 2 ? stats::pearson(out.q, out.discounted_return) : 0.0;
  return out;
}

std::vector<AblationRow> ablation(const ObjectiveFn& objective, std::span<const double> x1, const DqnModel& model,
                                  std::size_t horizon, std::size_t window) {
  std::vector<AblationRow> rows;
  auto run = [&](const char* name, std::optional<Feature> pinned) {
    QgdRunOptions opt;
    if (pinned) opt.pinned[static_cast<std::size_t>(*pinned)] = true;
    const auto tr = qgd_run(objective, model, x1, horizon, window, opt);
    rows.push_back({name, tr.final_f, tr.halves, tr.accepts});
  };
  run("none", std::nullopt);
  for (Feature f : kAblatedFeatures) run(feature_name(f), f);
  return rows;
}

const char* reward_kind_name(RewardKind k) noexcept {
  switch (k) {
    case RewardKind::inverse_distance: return "r_id";
    case RewardKind::sufficient_decrease: return "r_sd";
    case RewardKind::objective_change: return "r_oc";
  }
  return "?";
}

std::array<RewardScatter, 3> reward_compare(const std::vector<EpisodeDumpRow>& episodes, double gamma, double c,
                                            double f_lb) {
  std::map<std::int64_t, std::vector<double>> traces;
  for (const auto& r : episodes) traces[r.episode].push_back(r.f);
  std::array<RewardScatter, 3> out;
  out[0].kind = RewardKind::inverse_distance;
  out[1].kind = RewardKind::sufficient_decrease;
  out[2].kind = RewardKind::objective_change;
  for (auto& sc : out) {
    const RewardSpec spec{sc.kind, c, f_lb};
    for (const auto& [id, f] : traces) {
      if (f.size() < 2 || !std::isfinite(f.back())) continue;
      const auto rewards = trace_rewards(f, spec);
      sc.episode.push_back(id);
      sc.final_f.push_back(f.back());
      sc.rmax.push_back(episode_rmax(rewards, gamma));
    }
    if (sc.final_f.size() >= 2) {
      std::vector<double> neg(sc.final_f.size());
      std::transform(sc.final_f.begin(), sc.final_f.end(), neg.begin(), [](double v) { return -v; });
      sc.rank_correlation = stats::spearman(neg, sc.rmax);
    }
  }
  return out;
}

}  // namespace qgd
