#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "qgd/config.hpp"
#include "qgd/error.hpp"
#include "qgd/harness.hpp"
#include "qgd/stats.hpp"

namespace fs = std::filesystem;
using namespace qgd;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string variant = "v1";
  std::string model_v1;
  std::string model_v2;
  std::string resume_model;
  std::string resume_state;
};

RunConfig load(const Options& o) {
  RunConfig cfg = o.config.empty() ? desk_profile() : load_run_config(o.config);
  if (!o.out.empty()) cfg.out_dir = o.out;
  return cfg;
}

std::vector<std::uint64_t> seeds_or(const Options& o, std::vector<std::uint64_t> fallback) {
  if (o.seed) return {*o.seed};
  return fallback;
}

fs::path seed_dir(const RunConfig& cfg, std::uint64_t seed) {
  fs::path p = fs::path(cfg.out_dir) / ("seed-" + std::to_string(seed));
  fs::create_directories(p);
  return p;
}

Variant parse_variant(const std::string& s) {
  if (s == "v1") return Variant::v1;
  if (s == "v2") return Variant::v2;
  throw ConfigError("variant must be v1 or v2, got '" + s + "'");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Runs job(i) for every index on a small pool; rethrows the first failure in index order.
template <class Job>
void for_each_seed(std::size_t n, Job job) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot write " + p.string());
  os << text;
}

// Trains and writes model/log/episode dump into `dir`.
DqnModel train_and_save(const RunConfig& cfg, const SeedContext& ctx, Variant v, const fs::path& dir,
                        const Options& o) {
  const std::string tag = variant_name(v);
  const FeatureScaling scaling = training_scaling(cfg, ctx, v);
  RunConfig snapshot = cfg;
  snapshot.scaling = scaling;
  write_text(dir / "run.ini", format_run_config(snapshot));

  const TrainConfig tc = seeded_train_config(cfg, v, ctx.seed);
  std::optional<Trainer> trainer;
  if (!o.resume_model.empty())
    trainer.emplace(Trainer::resume(*ctx.objective, tc, ctx.x1, o.resume_model, o.resume_state));
  else
    trainer.emplace(*ctx.objective, tc, scaling, ctx.x1);

  std::vector<EpisodeDumpRow> dump;
  trainer->train(
      [&](const EpisodeResult& r) {
        const std::size_t first = dump.size();
        append_episode_dump(r, tc.window, dump);
        for (std::size_t i = first; i < dump.size(); ++i) {
          auto& row = dump[i];
          if (row.step >= tc.window && row.step - tc.window < r.actions.size())
            row.action = action_name(trainer->model().actions.action(r.actions[row.step - tc.window]));
        }
      },
      cfg.checkpoint_every, (dir / ("checkpoint_" + tag + "_")).string());

  save_model(trainer->model(), (dir / ("model_" + tag + ".qgdm")).string());
  write_train_log(trainer->log(), (dir / ("train_log_" + tag + ".csv")).string());
  write_episode_dump(dump, (dir / ("episodes_" + tag + ".csv")).string());
  return trainer->model();
}

DqnModel model_for(const RunConfig& cfg, std::uint64_t seed, Variant v, const std::string& explicit_path,
                   const Options& o) {
  if (!explicit_path.empty()) return load_model(explicit_path);
  const fs::path dir = seed_dir(cfg, seed);
  const fs::path p = dir / (std::string("model_") + variant_name(v) + ".qgdm");
  if (fs::exists(p)) return load_model(p.string());
  const SeedContext ctx = make_context(cfg, seed);
  return train_and_save(cfg, ctx, v, dir, o);
}

void write_gnuplot(const fs::path& dir, const std::vector<ComparisonRow>& rows, const std::string& title) {
  std::string s = "set datafile separator ','\nset key autotitle columnhead\nset logscale y\nset title '" + title +
                  "'\nset xlabel 'evaluation'\nset ylabel 'f'\nplot ";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) s += ", \\\n     ";
    s += "'trace_" + rows[i].optimizer + ".csv' using 1:2 with lines title '" + rows[i].optimizer + "'";
  }
  s += "\n";
  write_text(dir / "plot.gp", s);
}

void write_summary(const fs::path& path, const std::vector<ComparisonRow>& rows) {
  std::string s = "optimizer,initial_f,final_f,halving_frequency,halves,doubles,accepts,evaluations,diverged,min_alpha,max_alpha\n";
  for (const auto& r : rows)
    s += r.optimizer + "," + fmt(r.initial_f) + "," + fmt(r.final_f) + "," + fmt(r.halving_frequency) + "," +
         std::to_string(r.halves) + "," + std::to_string(r.doubles) + "," + std::to_string(r.accepts) + "," +
         std::to_string(r.evaluations) + "," + (r.diverged ? "1" : "0") + "," + fmt(r.min_alpha) + "," +
         fmt(r.max_alpha) + "\n";
  write_text(path, s);
}

void print_medians(const std::vector<std::vector<ComparisonRow>>& per_seed) {
  if (per_seed.empty()) return;
  std::printf("%-12s %14s %10s\n", "optimizer", "median_f", "half_freq");
  for (std::size_t k = 0; k < per_seed.front().size(); ++k) {
    std::vector<double> f, h;
    for (const auto& rows : per_seed) {
      f.push_back(rows[k].final_f);
      h.push_back(rows[k].halving_frequency);
    }
    std::printf("%-12s %14.6g %10.4f\n", per_seed.front()[k].optimizer.c_str(), stats::median(f), stats::median(h));
  }
}

int cmd_gen_data(const Options& o) {
  const RunConfig cfg = load(o);
  for (auto s : seeds_or(o, {cfg.seed})) {
    const SeedContext ctx = make_context(cfg, s);
    const fs::path p = seed_dir(cfg, s) / "dataset.csv";
    save_dataset(*ctx.data, p);
    std::printf("%s checksum=%016llx\n", p.string().c_str(), static_cast<unsigned long long>(ctx.data->checksum()));
  }
  return 0;
}

int cmd_calibrate(const Options& o) {
  const RunConfig cfg = load(o);
  for (auto s : seeds_or(o, {cfg.seed})) {
    const SeedContext ctx = make_context(cfg, s);
    RunConfig out = cfg;
    out.scaling = training_scaling(cfg, ctx, Variant::v1);
    const fs::path p = seed_dir(cfg, s) / "run.ini";
    write_text(p, format_run_config(out));
    std::printf("%s\n", p.string().c_str());
  }
  return 0;
}

int cmd_train(const Options& o) {
  const RunConfig cfg = load(o);
  const Variant v = parse_variant(o.variant);
  const auto seeds = seeds_or(o, {cfg.seed});
  for_each_seed(seeds.size(), [&](std::size_t i) {
    const SeedContext ctx = make_context(cfg, seeds[i]);
    train_and_save(cfg, ctx, v, seed_dir(cfg, seeds[i]), o);
  });
  for (auto s : seeds) std::printf("%s\n", (seed_dir(cfg, s) / (std::string("model_") + variant_name(v) + ".qgdm")).string().c_str());
  return 0;
}

int run_comparison(const Options& o, bool generalize) {
  const RunConfig cfg = load(o);
  const auto seeds = seeds_or(o, cfg.seeds);
  std::vector<std::vector<ComparisonRow>> rows(seeds.size());
  for_each_seed(seeds.size(), [&](std::size_t i) {
    const auto s = seeds[i];
    const DqnModel m1 = model_for(cfg, s, Variant::v1, o.model_v1, o);
    const DqnModel m2 = model_for(cfg, s, Variant::v2, o.model_v2, o);
    const auto& g = cfg.generalize;
    const SeedContext ctx =
        generalize ? make_context(cfg, s, g.data_factor, g.width_factor) : make_context(cfg, s);
    const std::size_t horizon = cfg.train_v1.horizon * (generalize ? g.horizon_factor : 1);
    const ComparisonReport rep = compare_optimizers(cfg, *ctx.objective, ctx.x1, &m1, &m2, horizon);
    fs::path dir = seed_dir(cfg, s) / (generalize ? "generalize" : "compare");
    fs::create_directories(dir);
    for (const auto& t : rep.traces) write_trace_csv(t, (dir / ("trace_" + t.optimizer + ".csv")).string());
    write_summary(dir / "summary.csv", rep.rows);
    write_gnuplot(dir, rep.rows, generalize ? "generalization" : "comparison");
    rows[i] = rep.rows;
  });
  print_medians(rows);
  return 0;
}

int cmd_qtrace(const Options& o) {
  const RunConfig cfg = load(o);
  const Variant v = parse_variant(o.variant);
  for (auto s : seeds_or(o, {cfg.seed})) {
    const DqnModel m = model_for(cfg, s, v, v == Variant::v1 ? o.model_v1 : o.model_v2, o);
    const SeedContext ctx = make_context(cfg, s);
    const QValueTrace q = qvalue_trace(*ctx.objective, ctx.x1, m, seeded_train_config(cfg, v, s));
    std::string text = "t,action,q,reward,discounted_return\n";
    for (std::size_t i = 0; i < q.t.size(); ++i)
      text += std::to_string(q.t[i]) + "," + action_name(m.actions.action(q.action[i])) + "," + fmt(q.q[i]) + "," +
              fmt(q.reward[i]) + "," + fmt(q.discounted_return[i]) + "\n";
    const fs::path dir = seed_dir(cfg, s);
    write_text(dir / (std::string("qtrace_") + variant_name(v) + ".csv"), text);
    write_text(dir / "qtrace.gp",
               "set datafile separator ','\nset key autotitle columnhead\nplot 'qtrace_" + std::string(variant_name(v)) +
                   ".csv' using 1:3 with lines title 'q', '' using 1:5 with lines title 'R'\n");
    std::printf("seed %llu pearson(q,R)=%.4f\n", static_cast<unsigned long long>(s), q.correlation);
  }
  return 0;
}

int cmd_ablate(const Options& o) {
  const RunConfig cfg = load(o);
  const auto seeds = seeds_or(o, cfg.ablation_seeds);
  std::vector<std::vector<AblationRow>> rows(seeds.size());
  for_each_seed(seeds.size(), [&](std::size_t i) {
    const DqnModel m = model_for(cfg, seeds[i], Variant::v1, o.model_v1, o);
    const SeedContext ctx = make_context(cfg, seeds[i]);
    rows[i] = ablation(*ctx.objective, ctx.x1, m, cfg.train_v1.horizon, cfg.train_v1.window);
    std::string text = "feature,final_f,halves,accepts\n";
    for (const auto& r : rows[i])
      text += r.feature + "," + fmt(r.final_f) + "," + std::to_string(r.halves) + "," + std::to_string(r.accepts) + "\n";
    write_text(seed_dir(cfg, seeds[i]) / "ablation.csv", text);
  });
  std::printf("%-8s %-16s %14s %7s %7s\n", "seed", "feature", "final_f", "halves", "accepts");
  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (const auto& r : rows[i])
      std::printf("%-8llu %-16s %14.6g %7zu %7zu\n", static_cast<unsigned long long>(seeds[i]), r.feature.c_str(),
                  r.final_f, r.halves, r.accepts);
  return 0;
}

int cmd_reward_compare(const Options& o) {
  const RunConfig cfg = load(o);
  for (auto s : seeds_or(o, {cfg.seed})) {
    const fs::path dir = seed_dir(cfg, s);
    const fs::path dump = dir / "episodes_v1.csv";
    if (!fs::exists(dump)) {
      const SeedContext ctx = make_context(cfg, s);
      train_and_save(cfg, ctx, Variant::v1, dir, o);
    }
    const auto& tc = cfg.train_v1;
    const auto sc = reward_compare(read_episode_dump(dump.string()), tc.gamma, tc.c1, cfg.objective.f_lb);
    std::string gp = "set datafile separator ','\nset key autotitle columnhead\nset multiplot layout 1,3\n";
    for (const auto& r : sc) {
      std::string text = "episode,final_f,rmax\n";
      for (std::size_t i = 0; i < r.episode.size(); ++i)
        text += std::to_string(r.episode[i]) + "," + fmt(r.final_f[i]) + "," + fmt(r.rmax[i]) + "\n";
      const std::string name = std::string("reward_") + reward_kind_name(r.kind) + ".csv";
      write_text(dir / name, text);
      gp += "plot '" + name + "' using 2:3 with points title '" + reward_kind_name(r.kind) + "'\n";
      std::printf("seed %llu %s spearman(-f_T, R_max)=%.4f\n", static_cast<unsigned long long>(s),
                  reward_kind_name(r.kind), r.rank_correlation);
    }
    write_text(dir / "rewards.gp", gp + "unset multiplot\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Q-learning controlled gradient descent"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "run configuration file");
    sub->add_option("--seed", o.seed, "run a single seed");
    sub->add_option("--out", o.out, "output directory");
  };
  auto models = [&](CLI::App* sub) {
    sub->add_option("--model-v1", o.model_v1, "v1 model file");
    sub->add_option("--model-v2", o.model_v2, "v2 model file");
  };

  std::function<int()> action;
  auto reg = [&](const char* name, const char* help, std::function<int()> fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub);
    sub->callback([&action, fn] { action = fn; });
    return sub;
  };

  reg("gen-data", "write the synthetic dataset", [&] { return cmd_gen_data(o); });
  reg("calibrate", "estimate feature scaling from an Armijo run", [&] { return cmd_calibrate(o); });
  auto* train = reg("train", "train a DQN learning-rate controller", [&] { return cmd_train(o); });
  train->add_option("--variant", o.variant, "v1 or v2");
  train->add_option("--resume-model", o.resume_model, "checkpoint model file");
  train->add_option("--resume-state", o.resume_state, "checkpoint state file");
  models(reg("compare", "compare Q-GD with line searches", [&] { return run_comparison(o, false); }));
  models(reg("generalize", "compare on the enlarged objective", [&] { return run_comparison(o, true); }));
  auto* qt = reg("qtrace", "q-value versus discounted return", [&] { return cmd_qtrace(o); });
  qt->add_option("--variant", o.variant, "v1 or v2");
  models(qt);
  models(reg("ablate", "zero single state features", [&] { return cmd_ablate(o); }));
  reg("reward-compare", "rank correlation of reward functions", [&] { return cmd_reward_compare(o); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (!o.resume_model.empty() && o.resume_state.empty()) throw ConfigError("--resume-model needs --resume-state");
    return action ? action() : 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "qgd: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "qgd: %s\n", e.what());
    return 3;
  }
}
