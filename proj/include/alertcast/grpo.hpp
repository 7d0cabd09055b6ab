#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "alertcast/verifier.hpp"

namespace alertcast {

// G scored responses to one prompt, with optional caller-supplied per-token
// probability ratios. This module never computes log-probabilities.
struct RolloutGroup {
  double truth = 0.0;
  std::vector<RewardOutcome> outcomes;
  std::vector<std::int64_t> lengths;  // |y_i| per response, tokens
  std::optional<std::vector<std::vector<double>>> per_token_ratios;

  std::size_t size() const { return outcomes.size(); }
  Eigen::VectorXd rewards() const;
};

// Group-standardized advantages: (R_i - mean) / (pop_std + eps_norm).
struct AdvantageSet {
  Eigen::VectorXd advantages;
  double group_mean = 0.0;
  double group_std = 0.0;  // population standard deviation
  double eps_norm = 0.0;
};

struct ClipConfig {
  double eps_low = 0.2;
  double eps_high = 0.2;
  std::optional<double> dual_clip_c;  // floors negative-advantage terms at c * A

  static ClipConfig symmetric(double eps) { return {eps, eps, std::nullopt}; }
  static ClipConfig asymmetric(double lo, double hi,
                               std::optional<double> c = std::nullopt) {
    return {lo, hi, c};
  }
  void validate() const;  // throws std::invalid_argument
};

// Requires G >= 2 and eps_norm >= 0. A zero-spread group yields all-zero
// advantages even at eps_norm = 0.
AdvantageSet group_advantages(const Eigen::VectorXd& rewards, double eps_norm);
AdvantageSet group_advantages(std::span<const double> rewards, double eps_norm);

// Clipped surrogate, token terms averaged per response then across the group.
double grpo_surrogate(const RolloutGroup& group, const AdvantageSet& adv, double eps);

// Token terms summed over the whole group and divided by the total token
// count; asymmetric clip bounds, optional dual-clip floor on negative
// advantages.
double dapo_surrogate(const RolloutGroup& group, const AdvantageSet& adv,
                      const ClipConfig& clip);

struct FilterResult {
  std::vector<RolloutGroup> kept;
  std::size_t dropped_all_correct = 0;
  std::size_t dropped_all_wrong = 0;
};

// Dynamic-sampling condition: keep groups where the count of responses with
// |parsed - truth| <= delta is strictly between 0 and G. Parse failures count
// as not-equivalent.
FilterResult dynamic_sampling_filter(std::vector<RolloutGroup> groups, double delta);

bool is_equivalent(const RewardOutcome& outcome, double truth, double delta);

struct SensitivityCheck {
  double lhs_max = 0.0;
  double rhs_max = 0.0;
  bool holds = false;
  Eigen::VectorXd lhs;  // per-response |A'_i - A_i|
  Eigen::VectorXd rhs;  // per-response bound
};

// Evaluates both sides of the normalized-advantage sensitivity bound for a
// group of shaped-reward errors and a perturbed copy, with Lipschitz constant
// L = alpha / delta (requires alpha >= 1).
SensitivityCheck advantage_sensitivity_bound(std::span<const double> errors,
                                             std::span<const double> perturbed,
                                             double delta, double alpha, double eps_norm);

}  // namespace alertcast
