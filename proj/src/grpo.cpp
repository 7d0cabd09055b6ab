#include "alertcast/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alertcast {

Eigen::VectorXd RolloutGroup::rewards() const {
  Eigen::VectorXd r(static_cast<Eigen::Index>(outcomes.size()));
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    r[i] = outcomes[static_cast<std::size_t>(i)].reward;
  }
  return r;
}

void ClipConfig::validate() const {
  if (!(eps_low > 0.0 && eps_low < 1.0) || !(eps_high > 0.0 && eps_high < 1.0)) {
    throw std::invalid_argument("clip config: eps bounds must lie in (0, 1)");
  }
  if (dual_clip_c && !(*dual_clip_c > 1.0)) {
    throw std::invalid_argument("clip config: dual_clip_c must be > 1");
  }
}

AdvantageSet group_advantages(const Eigen::VectorXd& rewards, double eps_norm) {
  if (rewards.size() < 2) {
    throw std::invalid_argument("group_advantages: need at least 2 rewards");
  }
  if (eps_norm < 0.0 || !std::isfinite(eps_norm)) {
    throw std::invalid_argument("group_advantages: eps_norm must be >= 0");
  }

  AdvantageSet out;
  out.eps_norm = eps_norm;
  out.group_mean = rewards.mean();
  if (rewards.maxCoeff() == rewards.minCoeff()) {
    // zero spread: all advantages are 0 regardless of eps_norm
    out.group_mean = rewards[0];
    out.group_std = 0.0;
    out.advantages = Eigen::VectorXd::Zero(rewards.size());
    return out;
  }
  Eigen::VectorXd centered = rewards.array() - out.group_mean;
  out.group_std = std::sqrt(centered.squaredNorm() / static_cast<double>(rewards.size()));
  double denom = out.group_std + eps_norm;
  out.advantages = centered / denom;
  return out;
}

AdvantageSet group_advantages(std::span<const double> rewards, double eps_norm) {
  return group_advantages(
      Eigen::Map<const Eigen::VectorXd>(rewards.data(),
                                        static_cast<Eigen::Index>(rewards.size()))
          .eval(),
      eps_norm);
}

namespace {

const std::vector<std::vector<double>>& checked_ratios(const RolloutGroup& group,
                                                       const AdvantageSet& adv) {
  if (!group.per_token_ratios) {
    throw std::invalid_argument("surrogate: per-token ratios are missing");
  }
  const auto& ratios = *group.per_token_ratios;
  if (ratios.size() != group.outcomes.size() ||
      adv.advantages.size() != static_cast<Eigen::Index>(group.outcomes.size())) {
    throw std::invalid_argument("surrogate: group size mismatch");
  }
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (ratios[i].empty()) {
      throw std::invalid_argument("surrogate: empty ratio sequence");
    }
    if (i < group.lengths.size() &&
        group.lengths[i] != static_cast<std::int64_t>(ratios[i].size())) {
      throw std::invalid_argument("surrogate: length does not match ratio sequence");
    }
    for (double w : ratios[i]) {
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("surrogate: ratios must be positive and finite");
      }
    }
  }
  return ratios;
}

double clipped_term(double w, double a, double lo, double hi) {
  return std::min(w * a, std::clamp(w, 1.0 - lo, 1.0 + hi) * a);
}

}  // namespace

double grpo_surrogate(const RolloutGroup& group, const AdvantageSet& adv, double eps) {
  ClipConfig::symmetric(eps).validate();
  const auto& ratios = checked_ratios(group, adv);
  double total = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    double a = adv.advantages[static_cast<Eigen::Index>(i)];
    double sum = 0.0;
    for (double w : ratios[i]) sum += clipped_term(w, a, eps, eps);
    total += sum / static_cast<double>(ratios[i].size());
  }
  return total / static_cast<double>(ratios.size());
}

double dapo_surrogate(const RolloutGroup& group, const AdvantageSet& adv,
                      const ClipConfig& clip) {
  clip.validate();
  const auto& ratios = checked_ratios(group, adv);
  double total = 0.0;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    double a = adv.advantages[static_cast<Eigen::Index>(i)];
    for (double w : ratios[i]) {
      double term = clipped_term(w, a, clip.eps_low, clip.eps_high);
      if (clip.dual_clip_c && a < 0.0) {
        term = std::max(term, *clip.dual_clip_c * a);
      }
      total += term;
    }
    tokens += ratios[i].size();
  }
  return total / static_cast<double>(tokens);
}

bool is_equivalent(const RewardOutcome& outcome, double truth, double delta) {
  return outcome.parsed.ok() && std::abs(*outcome.parsed.value - truth) <= delta;
}

FilterResult dynamic_sampling_filter(std::vector<RolloutGroup> groups, double delta) {
  FilterResult out;
  out.kept.reserve(groups.size());
  for (auto& g : groups) {
    std::size_t within = 0;
    for (const auto& o : g.outcomes) {
      if (is_equivalent(o, g.truth, delta)) ++within;
    }
    if (within == 0) {
      ++out.dropped_all_wrong;
    } else if (within == g.outcomes.size()) {
      ++out.dropped_all_correct;
    } else {
      out.kept.push_back(std::move(g));
    }
  }
  return out;
}

SensitivityCheck advantage_sensitivity_bound(std::span<const double> errors,
                                             std::span<const double> perturbed,
                                             double delta, double alpha, double eps_norm) {
  if (alpha < 1.0) {
    throw std::invalid_argument(
        "advantage_sensitivity_bound: requires alpha >= 1 (Lipschitz constant alpha/delta)");
  }
  if (errors.size() != perturbed.size() || errors.size() < 2) {
    throw std::invalid_argument("advantage_sensitivity_bound: need matched groups of size >= 2");
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i] < 0.0 || perturbed[i] < 0.0) {
      throw std::invalid_argument("advantage_sensitivity_bound: errors must be >= 0");
    }
  }

  const auto n = static_cast<Eigen::Index>(errors.size());
  Eigen::VectorXd base_rewards(n), pert_rewards(n), delta_e(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    base_rewards[i] = shaped_reward(errors[static_cast<std::size_t>(i)], delta, alpha);
    pert_rewards[i] = shaped_reward(perturbed[static_cast<std::size_t>(i)], delta, alpha);
    delta_e[i] = perturbed[static_cast<std::size_t>(i)] - errors[static_cast<std::size_t>(i)];
  }

  AdvantageSet base = group_advantages(base_rewards, eps_norm);
  AdvantageSet pert = group_advantages(pert_rewards, eps_norm);

  const double lipschitz = alpha / delta;
  const double max_shift = delta_e.cwiseAbs().maxCoeff();
  const double denom = base.group_std + eps_norm;

  SensitivityCheck out;
  out.lhs = (pert.advantages - base.advantages).cwiseAbs();
  out.rhs.resize(n);
  out.holds = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    double shift_i = std::abs(delta_e[i]) + max_shift;
    double reward_dev = std::abs(base_rewards[i] - base.group_mean);
    out.rhs[i] = lipschitz / denom * shift_i +
                 2.0 * lipschitz * max_shift / (denom * denom) *
                     (reward_dev + lipschitz * shift_i);
    if (out.lhs[i] > out.rhs[i]) out.holds = false;
  }
  out.lhs_max = out.lhs.maxCoeff();
  out.rhs_max = out.rhs.maxCoeff();
  return out;
}

}  // namespace alertcast
