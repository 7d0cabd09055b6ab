#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alertcast/alert_model.hpp"
#include "alertcast/grpo.hpp"
#include "alertcast/verifier.hpp"

namespace alertcast {

enum class ErrorModel { gaussian, lognormal_multiplicative, oracle };

std::optional<ErrorModel> parse_error_model(std::string_view s);
std::string_view error_model_name(ErrorModel m);

// Synthetic policy: how far fabricated predictions sit from the truth, how
// often they carry a parseable boxed answer, and how long/spread the
// responses and their per-token ratios are.
struct PolicyProfile {
  ErrorModel error_model = ErrorModel::gaussian;
  double sigma = 5.0;             // minutes (gaussian) or log-space sigma
  double parse_discipline = 1.0;  // probability of a valid boxed answer
  double verbosity_mean = 32.0;   // tokens
  double verbosity_spread = 0.0;
  double ratio_spread = 0.0;  // log-space spread of per-token ratios around 1

  void validate() const;
};

// G fabricated responses around the event's true duration, already scored
// with cfg; deterministic under seed. Refusal texts contain no digits, so
// strict parsing fails on them exactly.
RolloutGroup sample_group(const Event& event, const PolicyProfile& profile,
                          const RewardConfig& cfg, int G, std::uint64_t seed);

struct StepSummary {
  int step = 0;
  double mean_reward = 0.0;
  double mean_abs_advantage = 0.0;
  double kept_rate = 0.0;
  double drop_all_correct_rate = 0.0;
  double drop_all_wrong_rate = 0.0;
  double coverage = 0.0;
};

// Runs steps passes over the dataset: sample a group per event, score,
// normalize advantages, apply the dynamic-sampling condition, aggregate.
std::vector<StepSummary> simulate_training_signal(std::span<const Event> dataset,
                                                  const PolicyProfile& profile,
                                                  const RewardConfig& cfg, int steps,
                                                  std::uint64_t seed, int group_size = 8,
                                                  double eps_norm = 1e-6);

void write_summary_csv(std::ostream& out, std::span<const StepSummary> summaries);

}  // namespace alertcast
