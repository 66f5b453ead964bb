#include "qgd/replay.hpp"

#include <algorithm>

#include "qgd/error.hpp"

namespace qgd {

ReplayMemory::ReplayMemory(std::size_t recent_capacity, std::size_t best_capacity)
    : recent_cap_(recent_capacity), best_cap_(best_capacity) {}

void ReplayMemory::add_experience(Experience e) { open_.push_back(std::move(e)); }

void ReplayMemory::commit_episode(EpisodePtr record) {
  if (!record) throw ConfigError("cannot commit a null episode");
  if (recent_cap_ > 0) {
    recent_.push_back(record);
    while (recent_.size() > recent_cap_) recent_.pop_front();
  }
  if (best_cap_ > 0) {
    const bool full = best_.size() >= best_cap_;
    if (!full || record->rmax > best_.back()->rmax) {
      // Insert after every entry with rmax >= the new one so earlier episodes win ties.
      auto pos = std::find_if(best_.begin(), best_.end(),
                              [&](const EpisodePtr& p) { return p->rmax < record->rmax; });
      best_.insert(pos, std::move(record));
      if (best_.size() > best_cap_) best_.pop_back();
    }
  }
}

void ReplayMemory::restore(std::deque<EpisodePtr> recent, std::vector<EpisodePtr> best) {
  if (recent.size() > recent_cap_ || best.size() > best_cap_) throw FormatError("replay memory exceeds capacity");
  recent_ = std::move(recent);
  best_ = std::move(best);
  open_.clear();
}

std::vector<const EpisodeRecord*> ReplayMemory::stored_episodes() const {
  std::vector<const EpisodeRecord*> eps;
  eps.reserve(recent_.size() + best_.size());
  for (const auto& p : recent_) eps.push_back(p.get());
  for (const auto& p : best_)
    if (std::find(eps.begin(), eps.end(), p.get()) == eps.end()) eps.push_back(p.get());
  return eps;
}

std::size_t ReplayMemory::pool_size() const {
  std::size_t n = open_.size();
  for (const auto* e : stored_episodes()) n += e->experiences.size();
  return n;
}

std::vector<Experience> ReplayMemory::sample_minibatch(std::size_t size, bool use_best, Rng& rng) const {
  const auto eps = stored_episodes();
  std::vector<std::size_t> cumulative;
  cumulative.reserve(eps.size() + 1);
  std::size_t total = 0;
  for (const auto* e : eps) {
    total += e->experiences.size();
    cumulative.push_back(total);
  }
  total += open_.size();
  if (total == 0) throw ConfigError("cannot sample from an empty replay memory");

  std::vector<Experience> out;
  out.reserve(size);
  if (use_best) {
    std::size_t usable = 0;
    for (const auto& b : best_) usable += b->experiences.empty() ? 0 : 1;
    if (size < usable) throw ConfigError("mini-batch smaller than the number of best episodes");
    for (const auto& b : best_) {
      if (b->experiences.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, b->experiences.size() - 1);
      out.push_back(b->experiences[pick(rng)]);
    }
  }
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  while (out.size() < size) {
    const std::size_t k = pick(rng);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), k);
    if (it == cumulative.end()) {
      out.push_back(open_[k - (cumulative.empty() ? 0 : cumulative.back())]);
    } else {
      const auto idx = static_cast<std::size_t>(it - cumulative.begin());
      const std::size_t base = idx == 0 ? 0 : cumulative[idx - 1];
      out.push_back(eps[idx]->experiences[k - base]);
    }
  }
  return out;
}

}  // namespace qgd
