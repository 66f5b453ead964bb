#pragma once

#include <span>
#include <vector>

namespace qgd {

enum class RewardKind { inverse_distance, sufficient_decrease, objective_change };

struct RewardSpec {
  RewardKind kind = RewardKind::inverse_distance;
  double c = 0.1;
  double f_lb = 0.0;
};

/// c / (f - f_lb); DomainError unless f > f_lb and c > 0.
double reward_id(double f, double f_lb, double c);
/// 1 when f_prev >= 1.001 f_curr, else 0.
double reward_sd(double f_prev, double f_curr);
double reward_oc(double f_prev, double f_curr);

/// R_t = r_t + gamma R_{t+1}, computed backwards. Requires 0 < gamma <= 1.
std::vector<double> discounted_returns(std::span<const double> rewards, double gamma);

/// max_t R_t; 0 for an empty sequence.
double episode_rmax(std::span<const double> rewards, double gamma);

/// Per-step rewards for an objective trace f_0..f_n under `spec`: entry i
/// rewards the transition into f_{i+1}, so the result has n entries.
std::vector<double> trace_rewards(std::span<const double> f_trace, const RewardSpec& spec);

}  // namespace qgd
