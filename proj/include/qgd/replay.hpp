#pragma once
// Experience memory: the A most recent episodes plus the B best by R_max.

#include <cstdint>
#include <deque>
#include <memory>
#include <vector>

#include "qgd/dqn.hpp"

namespace qgd {

struct EpisodeRecord {
  std::int64_t episode_id = 0;
  std::vector<Experience> experiences;
  /// Objective value at every evaluated iterate, warm-up included.
  std::vector<double> objective_trace;
  double rmax = 0.0;
};

using EpisodePtr = std::shared_ptr<const EpisodeRecord>;

class ReplayMemory {
 public:
  ReplayMemory(std::size_t recent_capacity, std::size_t best_capacity);

  std::size_t recent_capacity() const { return recent_cap_; }
  std::size_t best_capacity() const { return best_cap_; }

  /// Experiences of the episode in progress; sampled alongside stored ones.
  void add_experience(Experience e);
  const std::vector<Experience>& open_experiences() const { return open_; }
  void clear_open() { open_.clear(); }

  void commit_episode(EpisodePtr record);

  /// Replaces the stored episodes wholesale (checkpoint restore). `best`
  /// must already be in memory order.
  void restore(std::deque<EpisodePtr> recent, std::vector<EpisodePtr> best);

  const std::deque<EpisodePtr>& recent() const { return recent_; }
  /// Best episodes in descending rmax order (equal rmax: earlier commit first).
  const std::vector<EpisodePtr>& best() const { return best_; }

  /// Number of distinct experiences in the sampling pool.
  std::size_t pool_size() const;
  bool empty() const { return pool_size() == 0; }

  /// One uniform draw from every best episode when `use_best`, the rest
  /// uniform with replacement over the whole pool.
  std::vector<Experience> sample_minibatch(std::size_t size, bool use_best, Rng& rng) const;

 private:
  // Distinct stored episodes (recent union best).
  std::vector<const EpisodeRecord*> stored_episodes() const;

  std::size_t recent_cap_;
  std::size_t best_cap_;
  std::deque<EpisodePtr> recent_;
  std::vector<EpisodePtr> best_;
  std::vector<Experience> open_;
};

}  // namespace qgd
