#include "qgd/rewards.hpp"

#include <algorithm>
#include <string>

#include "qgd/error.hpp"

namespace qgd {

double reward_id(double f, double f_lb, double c) {
  if (!(c > 0.0)) throw DomainError("reward scale c must be positive");
  if (!(f > f_lb))
    throw DomainError("objective " + std::to_string(f) + " is not above the lower bound " + std::to_string(f_lb));
  return c / (f - f_lb);
}

double reward_sd(double f_prev, double f_curr) { return f_prev >= 1.001 * f_curr ? 1.0 : 0.0; }

double reward_oc(double f_prev, double f_curr) { return f_prev - f_curr; }

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("discount factor must lie in (0, 1]");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    out[i] = acc;
  }
  return out;
}

double episode_rmax(std::span<const double> rewards, double gamma) {
  const auto r = discounted_returns(rewards, gamma);
  if (r.empty()) return 0.0;
  return *std::max_element(r.begin(), r.end());
}

std::vector<double> trace_rewards(std::span<const double> f, const RewardSpec& spec) {
  std::vector<double> out;
  if (f.size() < 2) return out;
  out.reserve(f.size() - 1);
  for (std::size_t i = 1; i < f.size(); ++i) {
    switch (spec.kind) {
      case RewardKind::inverse_distance: out.push_back(reward_id(f[i], spec.f_lb, spec.c)); break;
      case RewardKind::sufficient_decrease: out.push_back(reward_sd(f[i - 1], f[i])); break;
      case RewardKind::objective_change: out.push_back(reward_oc(f[i - 1], f[i])); break;
    }
  }
  return out;
}

}  // namespace qgd
