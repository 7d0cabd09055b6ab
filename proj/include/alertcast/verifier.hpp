#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>

namespace alertcast {

enum class RewardKind { r0, r1, r2 };
enum class ParseMode { strict, lenient };

std::optional<RewardKind> parse_reward_kind(std::string_view s);
std::string_view reward_kind_name(RewardKind k);

// Linear length penalty: 0 at expected_len, 1 at expected_len + buffer_len.
struct OverlongConfig {
  std::int64_t expected_len = 4096;
  std::int64_t buffer_len = 4096;
};

struct RewardConfig {
  RewardKind kind = RewardKind::r2;
  double delta = 10.0;  // tolerance band, minutes
  double alpha = 2.0;   // decay steepness (r2)
  // error charged on parse failure under r0; defaults to delta
  std::optional<double> parse_fail_error;
  std::optional<OverlongConfig> overlong;

  double fail_error() const { return parse_fail_error.value_or(delta); }
  void validate() const;  // throws std::invalid_argument
};

// Parsed prediction in minutes, or the failure mark (empty value).
struct ParseResult {
  std::optional<double> value;
  std::optional<std::pair<std::size_t, std::size_t>> matched_span;

  bool ok() const { return value.has_value(); }
};

struct RewardOutcome {
  ParseResult parsed;
  std::optional<double> error;  // |pred - truth|, absent on parse failure for r1/r2
  double reward = 0.0;
  double overlong_penalty = 0.0;  // in [0, 1]
};

// Deterministic numeric extraction. Strict mode reads the last \boxed{...}
// whose content parses as a nonnegative finite number (optionally with
// thousands commas and a trailing "min"/"minutes"). Lenient mode falls back
// to the last standalone number in the text when no box parses.
ParseResult parse_answer(std::string_view text, ParseMode mode = ParseMode::strict);

// Reward kernels over the absolute error, exposed for direct evaluation.
double shaped_reward(double error, double delta, double alpha);   // r2
double binary_reward(double error, double delta);                 // r1, strict <
double neg_mae_reward(double error);                              // r0

double overlong_penalty(std::int64_t response_len, const OverlongConfig& cfg);

// Scores one parsed response against the ground truth. The overlong penalty
// is subtracted after the raw reward and applies only when both the config
// and response_len are present; r1/r2 rewards may go negative as a result.
RewardOutcome reward(const ParseResult& parsed, double truth, const RewardConfig& cfg,
                     std::optional<std::int64_t> response_len = std::nullopt);

RewardOutcome score_text(std::string_view text, double truth, const RewardConfig& cfg,
                         ParseMode mode = ParseMode::strict,
                         std::optional<std::int64_t> response_len = std::nullopt);

// Fraction of outcomes with a successfully parsed value; throws on empty.
double coverage(std::span<const RewardOutcome> outcomes);

}  // namespace alertcast
