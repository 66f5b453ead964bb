// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Tolerances and limits are pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "qgd/config.hpp"
#include "qgd/descent.hpp"
#include "qgd/dqn.hpp"
#include "qgd/features.hpp"
#include "qgd/harness.hpp"
#include "qgd/kernels.hpp"
#include "qgd/nn.hpp"
#include "qgd/objective.hpp"
#include "qgd/replay.hpp"
#include "qgd/stats.hpp"
#include "qgd/trainer.hpp"

using namespace qgd;
namespace fs = std::filesystem;

namespace {

constexpr double kGradTol = 1e-5;
constexpr double kFdStep = 1e-5;
constexpr int kGradDraws = 20;
constexpr double kArmijoC = 1e-4;
constexpr int kFuzzDraws = 100000;
constexpr int kReplaySequences = 1000;
constexpr double kMinQCorrelation = 0.5;
constexpr double kGdRelTol = 1e-12;

constexpr double kLimitGrad = 10.0;
constexpr double kLimitLineSearch = 30.0;
constexpr double kLimitFeatures = 30.0;
constexpr double kLimitBellman = 30.0;
constexpr double kLimitDeterminism = 600.0;
constexpr double kLimitEfficacy = 1800.0;
constexpr double kLimitGeneralize = 1200.0;
constexpr double kLimitRewards = 60.0;

const std::vector<std::uint64_t> kSeeds = {0, 1, 2, 3, 4};
const std::vector<std::uint64_t> kAblationSeeds = {0, 1, 2};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Outcome& o, double secs, double limit) {
  const bool in_time = limit <= 0.0 || secs <= limit;
  const bool ok = o.pass && in_time;
  if (!ok) ++failures;
  std::printf("%s %2d %-14s %s (%.1fs%s)\n", ok ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs,
              in_time ? "" : " over limit");
  std::fflush(stdout);
}

template <typename F>
void criterion(int id, const char* name, double limit, F&& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  report(id, name, o, seconds_since(t0), limit);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double max_rel_error(const ParamVector& a, const ParamVector& n) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - n[i]) / std::max({std::abs(a[i]), std::abs(n[i]), 1e-4}));
  return worst;
}

ParamVector central_difference(ParamVector p, const std::function<double(const ParamVector&)>& f) {
  ParamVector g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + kFdStep;
    const double up = f(p);
    p[i] = keep - kFdStep;
    const double down = f(p);
    p[i] = keep;
    g[i] = (up - down) / (2 * kFdStep);
  }
  return g;
}

// ---- 1 ----------------------------------------------------------------

Outcome gradients() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_obj = 0.0, worst_dqn = 0.0;
  for (int draw = 0; draw < kGradDraws; ++draw) {
    std::vector<std::size_t> sizes = {1 + rng() % 8};
    const std::size_t hidden = rng() % 3;
    const std::size_t caps[] = {8, 4};
    for (std::size_t l = 0; l < hidden; ++l) sizes.push_back(1 + rng() % caps[l]);
    sizes.push_back(2 + rng() % 2);
    const Architecture arch{sizes};
    const std::size_t n = sizes.back() + rng() % 8;
    auto data = std::make_shared<const Dataset>(generate_dataset(rng(), n, sizes.front(), sizes.back(), 0.3));
    const ObjectiveFn obj(arch, data);
    ParamVector p(arch.num_params());
    for (auto& v : p) v = u(rng);
    const auto analytic = obj.evaluate_with_gradient(p).grad;
    const auto numeric = central_difference(p, [&](const ParamVector& q) { return obj.evaluate(q); });
    worst_obj = std::max(worst_obj, max_rel_error(analytic, numeric));
  }
  for (int draw = 0; draw < kGradDraws; ++draw) {
    const Variant v = draw % 2 ? Variant::v2 : Variant::v1;
    auto m = DqnModel::create(v, FeatureScaling::with_fixed_ranges(0.0, 3, 100), 1.0,
                              {1 + rng() % 8, 1 + rng() % 4});
    for (auto& w : m.params) w = u(rng);
    std::vector<Experience> batch(1 + rng() % 8);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      auto& e = batch[i];
      for (auto& s : e.state) s = u(rng);
      for (auto& s : e.next_state) s = u(rng);
      e.action = rng() % m.actions.size();
      e.reward = u(rng);
      e.terminal = i % 3 == 0;
    }
    Vector inputs, targets;
    for (const auto& e : batch) {
      const auto t = build_target(m, e, 0.99);
      inputs.insert(inputs.end(), e.state.begin(), e.state.end());
      targets.insert(targets.end(), t.target.begin(), t.target.end());
    }
    const BatchView x{inputs, batch.size(), kNumFeatures}, y{targets, batch.size(), m.actions.size()};
    const auto analytic = minibatch_loss_gradient(m, batch, 0.99).grad;
    const auto numeric =
        central_difference(m.params, [&](const ParamVector& q) { return loss_and_gradient(m.arch, q, x, y).loss; });
    worst_dqn = std::max(worst_dqn, max_rel_error(analytic, numeric));
  }
  return {worst_obj < kGradTol && worst_dqn < kGradTol,
          fmt("max rel err objective=%.2e dqn=%.2e (tol %.0e)", worst_obj, worst_dqn, kGradTol)};
}

// ---- 2 ----------------------------------------------------------------

// Replays the run from x_1 and checks every recorded decision against the
// sufficient-decrease inequality. Returns the number of violations.
std::size_t replay_violations(const ObjectiveFn& obj, const LineSearchConfig& cfg, std::span<const double> x1,
                              const OptRunTrace& tr, std::size_t& accepted) {
  std::size_t bad = 0;
  ParamVector xb(x1.begin(), x1.end());
  ParamVector g = obj.gradient(xb);
  std::deque<double> window{obj.evaluate(xb)};
  double alpha = cfg.alpha_c;
  if (tr.steps.front().f != window.back()) ++bad;
  for (std::size_t s = 1; s < tr.steps.size(); ++s) {
    const auto& st = tr.steps[s];
    ParamVector x(xb.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = xb[i] - alpha * g[i];
    const double f = obj.evaluate(x);
    double gd = 0.0;
    for (double gi : g) gd -= gi * gi;
    const double ref = *std::max_element(window.begin(), window.end());
    if (st.f != f || st.alpha != alpha || st.reference_f != ref) ++bad;
    if (std::abs(st.g_dot_d - gd) > kGdRelTol * std::abs(gd)) ++bad;
    const bool holds = f <= ref + cfg.c * alpha * st.g_dot_d;
    if (st.action == StepKind::accept) {
      ++accepted;
      if (!holds) ++bad;
      xb = x;
      g = obj.gradient(xb);
      window.push_back(f);
      if (window.size() > cfg.window) window.pop_front();
      alpha = cfg.alpha_c;
    } else {
      if (holds || st.action != StepKind::half) ++bad;
      alpha *= cfg.shrink;
    }
  }
  return bad;
}

Outcome linesearch_soundness(const RunConfig& cfg) {
  std::size_t bad = 0, accepted = 0;
  for (auto seed : kSeeds) {
    const auto ctx = make_context(cfg, seed);
    for (std::size_t m : {std::size_t{1}, cfg.nonmonotone_window}) {
      auto ls = cfg.linesearch(m);
      ls.c = kArmijoC;
      const auto tr = linesearch_gd(*ctx.objective, ls, ctx.x1);
      bad += replay_violations(*ctx.objective, ls, ctx.x1, tr, accepted);
    }
  }
  return {bad == 0 && accepted > 0,
          fmt("%.0f accepted iterates replayed, %.0f violations", static_cast<double>(accepted),
              static_cast<double>(bad))};
}

// ---- 3 ----------------------------------------------------------------

Outcome feature_contract() {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t out_of_range = 0, window_mismatch = 0, encode_mismatch = 0;
  for (int draw = 0; draw < kFuzzDraws; ++draw) {
    auto s = FeatureScaling::with_fixed_ranges(0.0, 3, 100);
    for (Feature f : {Feature::learning_rate, Feature::objective_value, Feature::grad_dot_dir}) {
      const double a = std::exp(10 * u(rng) - 5);
      s[f].min = a;
      s[f].max = a * (1 + 10 * u(rng)) + 1e-9;
    }
    HistoryWindow h;
    h.capacity = 1 + rng() % 5;
    const std::size_t n = 1 + rng() % 6;
    std::vector<double> d(n), g(n), all;
    const int len = 1 + static_cast<int>(rng() % 10);
    for (int i = 0; i < len; ++i) {
      for (auto& v : d) v = u(rng) - 0.5;
      const double f = (rng() % 2) ? static_cast<double>(1 + rng() % 8) / 4.0 : std::exp(8 * u(rng) - 4);
      all.push_back(f);
      update_window(h, f, d);
    }
    std::vector<double> sorted = all;
    std::stable_sort(sorted.begin(), sorted.end());
    if (sorted.size() > h.capacity) sorted.resize(h.capacity);
    if (h.lowest != sorted) ++window_mismatch;

    const double f_t = (rng() % 2) ? static_cast<double>(1 + rng() % 8) / 4.0 : std::exp(12 * u(rng) - 6);
    const double lo = *std::min_element(sorted.begin(), sorted.end());
    const double hi = *std::max_element(sorted.begin(), sorted.end());
    const int expected = f_t <= lo ? 1 : (f_t <= hi ? 0 : -1);
    if (encode_min_max(f_t, h.lowest) != expected) ++encode_mismatch;

    h.t = rng() % 300;
    h.alpha = std::exp(20 * u(rng) - 10);
    for (auto& v : g) v = std::exp(10 * u(rng) - 5) * (u(rng) < 0.5 ? -1 : 1);
    for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    const auto st = build_state(h, f_t, g, d, s);
    for (double v : st)
      if (!(v >= -1.0 && v <= 1.0)) ++out_of_range;
    if (st[static_cast<std::size_t>(Feature::encoding)] != static_cast<double>(expected)) ++encode_mismatch;
  }
  return {out_of_range + window_mismatch + encode_mismatch == 0,
          fmt("%.0f draws: out-of-range=%.0f window-mismatch=%.0f encode-mismatch=%.0f", kFuzzDraws,
              static_cast<double>(out_of_range), static_cast<double>(window_mismatch),
              static_cast<double>(encode_mismatch))};
}

// ---- 4 ----------------------------------------------------------------

Outcome bellman_replay(const RunConfig& cfg) {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t target_bad = 0, terminal_bad = 0, oracle_bad = 0, batch_bad = 0;

  for (Variant v : {Variant::v1, Variant::v2}) {
    auto m = DqnModel::create(v, FeatureScaling::with_fixed_ranges(0.0, 3, 100), 1.0);
    Rng init(v == Variant::v1 ? 1 : 2);
    glorot_init(m, init);
    for (int i = 0; i < 1000; ++i) {
      Experience e;
      for (auto& s : e.state) s = u(rng);
      for (auto& s : e.next_state) s = u(rng);
      e.action = rng() % m.actions.size();
      e.reward = u(rng);
      e.terminal = i % 2 == 0;
      const auto t = build_target(m, e, 0.99);
      const auto q = q_values(m, e.state);
      for (std::size_t a = 0; a < q.size(); ++a)
        if (a != e.action && t.target[a] != q[a]) ++target_bad;
      if (e.terminal) {
        if (t.target[e.action] != e.reward) ++terminal_bad;
        for (auto& s : e.next_state) s = u(rng);
        if (build_target(m, e, 0.99).target != t.target) ++terminal_bad;
      } else {
        const auto qn = q_values(m, e.next_state);
        const double expect = e.reward + 0.99 * *std::max_element(qn.begin(), qn.end());
        if (t.target[e.action] != expect) ++terminal_bad;
      }
    }
  }

  for (int seq = 0; seq < kReplaySequences; ++seq) {
    const std::size_t A = 1 + rng() % 6, B = rng() % 4;
    ReplayMemory mem(A, B);
    std::vector<std::pair<std::int64_t, double>> all;
    const int commits = 1 + static_cast<int>(rng() % 30);
    for (int i = 0; i < commits; ++i) {
      auto r = std::make_shared<EpisodeRecord>();
      r->episode_id = i;
      r->rmax = static_cast<double>(rng() % 8);
      r->experiences.resize(1);
      all.emplace_back(i, r->rmax);
      mem.commit_episode(r);
      std::vector<std::int64_t> recent, best, got_recent, got_best;
      for (std::size_t k = all.size() > A ? all.size() - A : 0; k < all.size(); ++k) recent.push_back(all[k].first);
      auto sorted = all;
      std::stable_sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.second > b.second; });
      for (std::size_t k = 0; k < std::min(B, sorted.size()); ++k) best.push_back(sorted[k].first);
      for (const auto& p : mem.recent()) got_recent.push_back(p->episode_id);
      for (const auto& p : mem.best()) got_best.push_back(p->episode_id);
      if (recent != got_recent || best != got_best) ++oracle_bad;
    }
  }

  // Composition rule inside training: each batch opens with one draw per best
  // episode from the enabling episode on, and never before it.
  auto data = std::make_shared<const Dataset>(generate_dataset(5, 60, 8, 3, 0.3));
  const ObjectiveFn obj(Architecture{{8, 8, 4, 3}}, data);
  TrainConfig tc = cfg.train_v1;
  tc.episodes = tc.best_enabled_after + 6;
  tc.horizon = 8;
  tc.seed = 17;
  auto sc = FeatureScaling::with_fixed_ranges(0.0, tc.window, tc.horizon);
  sc[Feature::learning_rate] = {0.0, 2.0 * tc.alpha_c, 0.0, false};
  sc[Feature::objective_value] = {0.5, 60.0, 0.0, true};
  sc[Feature::grad_dot_dir] = {0.5, 1e5, 0.0, true};
  Trainer tr(obj, tc, sc, initial_iterate(obj.arch(), 9));
  std::size_t late = 0, early = 0;
  tr.on_minibatch = [&](std::size_t episode, std::span<const Experience> batch) {
    const auto& best = tr.memory().best();
    bool prefix = best.size() == tc.best_episodes;
    for (std::size_t k = 0; prefix && k < best.size(); ++k) prefix = batch[k].episode_id == best[k]->episode_id;
    if (episode >= tc.best_enabled_after) {
      ++late;
      if (!prefix) ++batch_bad;
    } else if (best.size() == tc.best_episodes) {
      ++early;
      if (prefix) ++batch_bad;
    }
  };
  tr.train();
  const bool ok = target_bad + terminal_bad + oracle_bad + batch_bad == 0 && late > 0 && early > 0;
  return {ok, fmt("target=%.0f terminal=%.0f replay-oracle=%.0f batch=%.0f mismatches", static_cast<double>(target_bad),
                  static_cast<double>(terminal_bad), static_cast<double>(oracle_bad), static_cast<double>(batch_bad))};
}

// ---- 5 ----------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) return {};
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QGD_CLI_PATH) + " " + args + " >/dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome determinism(const fs::path& out) {
  const fs::path a = out / "determinism-a", b = out / "determinism-b";
  fs::remove_all(a);
  fs::remove_all(b);
  const int ra = run_cli("train --seed 7 --out " + a.string());
  const int rb = run_cli("train --seed 7 --out " + b.string());
  if (ra != 0 || rb != 0) return {false, fmt("qgd train exited with %.0f and %.0f", ra, rb)};
  const auto ma = slurp(a / "seed-7/model_v1.qgdm"), mb = slurp(b / "seed-7/model_v1.qgdm");
  const auto la = slurp(a / "seed-7/train_log_v1.csv"), lb = slurp(b / "seed-7/train_log_v1.csv");
  const bool ok = !ma.empty() && !la.empty() && ma == mb && la == lb;
  return {ok, std::string("model ") + (ma == mb ? "identical" : "differs") + ", log " +
                  (la == lb ? "identical" : "differs") + " (" + std::to_string(ma.size()) + " model bytes)"};
}

// ---- 6-10 -------------------------------------------------------------

struct SeedModel {
  std::uint64_t seed = 0;
  TrainOutcome trained;
};

double median_of(const std::vector<double>& v) { return stats::median(v); }

Outcome efficacy(const RunConfig& cfg, const std::vector<SeedModel>& models) {
  std::vector<double> fq, fa, hq, ha;
  for (const auto& sm : models) {
    const auto ctx = make_context(cfg, sm.seed);
    const auto rep = compare_optimizers(cfg, *ctx.objective, ctx.x1, &sm.trained.model, nullptr,
                                        cfg.train_v1.horizon);
    fq.push_back(rep.row("qgd-v1").final_f);
    fa.push_back(rep.row("armijo").final_f);
    hq.push_back(rep.row("qgd-v1").halving_frequency);
    ha.push_back(rep.row("armijo").halving_frequency);
  }
  const double mfq = median_of(fq), mfa = median_of(fa), mhq = median_of(hq), mha = median_of(ha);
  return {mfq <= mfa && mhq < mha,
          fmt("median f: qgd-v1=%.4g armijo=%.4g; halving: qgd-v1=%.3f armijo=%.3f", mfq, mfa, mhq, mha)};
}

Outcome generalization(const RunConfig& cfg, const std::vector<SeedModel>& models) {
  std::vector<double> fq, fa;
  const auto& g = cfg.generalize;
  for (const auto& sm : models) {
    const auto ctx = make_context(cfg, sm.seed, g.data_factor, g.width_factor);
    const auto rep = compare_optimizers(cfg, *ctx.objective, ctx.x1, &sm.trained.model, nullptr,
                                        cfg.train_v1.horizon * g.horizon_factor);
    fq.push_back(rep.row("qgd-v1").final_f);
    fa.push_back(rep.row("armijo").final_f);
  }
  const double mq = median_of(fq), ma = median_of(fa);
  return {mq <= ma, fmt("median f on enlarged objective: qgd-v1=%.4g armijo=%.4g", mq, ma)};
}

Outcome qvalue_convergence(const RunConfig& cfg, const std::vector<SeedModel>& models, const fs::path& out) {
  const auto& sm = models.front();
  const auto ctx = make_context(cfg, sm.seed);
  const auto q = qvalue_trace(*ctx.objective, ctx.x1, sm.trained.model, seeded_train_config(cfg, Variant::v1, sm.seed));
  std::ofstream os(out / "qtrace_seed0.csv");
  os << "t,action,q,discounted_return\n";
  char buf[128];
  for (std::size_t i = 0; i < q.t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g\n", q.t[i], q.action[i], q.q[i], q.discounted_return[i]);
    os << buf;
  }
  return {q.correlation > kMinQCorrelation,
          fmt("pearson(q, R)=%.4f over %.0f steps (threshold %.2f)", q.correlation, static_cast<double>(q.t.size()),
              kMinQCorrelation) +
              ", pairs in " + (out / "qtrace_seed0.csv").string()};
}

Outcome reward_ranking(const RunConfig& cfg, const std::vector<SeedModel>& models) {
  std::vector<EpisodeDumpRow> pooled;
  for (const auto& sm : models)
    for (auto row : sm.trained.episodes) {
      row.episode += static_cast<std::int64_t>(sm.seed) * 1000000;
      pooled.push_back(std::move(row));
    }
  const auto sc = reward_compare(pooled, cfg.train_v1.gamma, cfg.train_v1.c1, cfg.objective.f_lb);
  const double id = sc[0].rank_correlation, sd = sc[1].rank_correlation, oc = sc[2].rank_correlation;
  return {id > sd && id > oc,
          fmt("spearman(-f_T, R_max) over %.0f episodes: r_id=%.4f r_sd=%.4f r_oc=%.4f",
              static_cast<double>(sc[0].episode.size()), id, sd, oc)};
}

Outcome ablation_direction(const RunConfig& cfg, const std::vector<SeedModel>& models) {
  std::size_t worse = 0, total = 0;
  std::string per;
  for (const auto& sm : models) {
    if (std::find(kAblationSeeds.begin(), kAblationSeeds.end(), sm.seed) == kAblationSeeds.end()) continue;
    const auto ctx = make_context(cfg, sm.seed);
    const auto rows = ablation(*ctx.objective, ctx.x1, sm.trained.model, cfg.train_v1.horizon, cfg.train_v1.window);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      ++total;
      const bool w = rows[i].final_f >= rows[0].final_f;
      worse += w;
      per += w ? '+' : '-';
    }
    per += ' ';
  }
  return {total == 9 && 2 * worse > total,
          fmt("%.0f of %.0f pinned runs end at or above baseline", static_cast<double>(worse),
              static_cast<double>(total)) +
              " [" + per.substr(0, per.size() - 1) + "]"};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::current_path() / "acceptance-out";
  fs::create_directories(out);
  const RunConfig cfg = desk_profile();

  criterion(1, "gradients", kLimitGrad, [] { return gradients(); });
  criterion(2, "line-search", kLimitLineSearch, [&] { return linesearch_soundness(cfg); });
  criterion(3, "features", kLimitFeatures, [] { return feature_contract(); });
  criterion(4, "bellman-replay", kLimitBellman, [&] { return bellman_replay(cfg); });
  criterion(5, "determinism", kLimitDeterminism, [&] { return determinism(out); });

  std::vector<SeedModel> models;
  const auto t_train = Clock::now();
  for (auto seed : kSeeds) {
    const auto ctx = make_context(cfg, seed);
    models.push_back({seed, train_model(cfg, ctx, Variant::v1, training_scaling(cfg, ctx, Variant::v1), true)});
    save_model(models.back().trained.model, (out / ("model_v1_seed" + std::to_string(seed) + ".qgdm")).string());
  }
  const double train_secs = seconds_since(t_train);
  std::printf("     trained %zu v1 models in %.1fs\n", models.size(), train_secs);

  {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = efficacy(cfg, models);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    report(6, "efficacy", o, train_secs + seconds_since(t0), kLimitEfficacy);
  }
  criterion(7, "generalization", kLimitGeneralize, [&] { return generalization(cfg, models); });
  criterion(8, "q-convergence", 0.0, [&] { return qvalue_convergence(cfg, models, out); });
  criterion(9, "reward-ranking", kLimitRewards, [&] { return reward_ranking(cfg, models); });
  criterion(10, "ablation", 0.0, [&] { return ablation_direction(cfg, models); });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
