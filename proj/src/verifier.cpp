#include "alertcast/verifier.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

namespace alertcast {

std::optional<RewardKind> parse_reward_kind(std::string_view s) {
  if (s == "r0" || s == "R0") return RewardKind::r0;
  if (s == "r1" || s == "R1") return RewardKind::r1;
  if (s == "r2" || s == "R2") return RewardKind::r2;
  return std::nullopt;
}

std::string_view reward_kind_name(RewardKind k) {
  switch (k) {
    case RewardKind::r0: return "r0";
    case RewardKind::r1: return "r1";
    case RewardKind::r2: return "r2";
  }
  return "r2";
}

void RewardConfig::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("reward config: delta must be > 0");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("reward config: alpha must be > 0");
  }
  if (parse_fail_error && (*parse_fail_error < 0.0 || !std::isfinite(*parse_fail_error))) {
    throw std::invalid_argument("reward config: parse_fail_error must be >= 0");
  }
  if (overlong) {
    if (overlong->buffer_len <= 0) {
      throw std::invalid_argument("reward config: overlong buffer_len must be > 0");
    }
    if (overlong->expected_len < 0) {
      throw std::invalid_argument("reward config: overlong expected_len must be >= 0");
    }
  }
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Scans one number token at position i: digits, commas as thousands
// separators (only between digits), one optional fraction part. Returns the
// end offset or i if no token starts here.
std::size_t scan_number(std::string_view s, std::size_t i) {
  if (i >= s.size() || !is_digit(s[i])) return i;
  std::size_t j = i;
  while (j < s.size() && is_digit(s[j])) ++j;
  while (j + 1 < s.size() && s[j] == ',' && is_digit(s[j + 1])) {
    ++j;
    while (j < s.size() && is_digit(s[j])) ++j;
  }
  if (j + 1 < s.size() && s[j] == '.' && is_digit(s[j + 1])) {
    ++j;
    while (j < s.size() && is_digit(s[j])) ++j;
  }
  return j;
}

std::optional<double> to_value(std::string_view token) {
  std::string digits;
  digits.reserve(token.size());
  for (char c : token) {
    if (c != ',') digits.push_back(c);
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  if (!std::isfinite(v) || v < 0.0) return std::nullopt;
  return v;
}

bool is_unit_word(std::string_view w) {
  std::string lower(w);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower == "min" || lower == "mins" || lower == "minute" || lower == "minutes";
}

struct BoxedNumber {
  double value = 0.0;
  std::size_t begin = 0;  // offsets of the numeral in the full text
  std::size_t end = 0;
};

// Parses box content of the form: ws* number ws* [unit] [.] ws*
std::optional<BoxedNumber> parse_box_content(std::string_view text, std::size_t lo,
                                             std::size_t hi) {
  std::size_t i = lo;
  while (i < hi && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  std::size_t num_end = scan_number(text, i);
  if (num_end == i || num_end > hi) return std::nullopt;
  auto value = to_value(text.substr(i, num_end - i));
  if (!value) return std::nullopt;

  std::size_t j = num_end;
  while (j < hi && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
  if (j < hi && std::isalpha(static_cast<unsigned char>(text[j]))) {
    std::size_t w = j;
    while (w < hi && std::isalpha(static_cast<unsigned char>(text[w]))) ++w;
    if (!is_unit_word(text.substr(j, w - j))) return std::nullopt;
    j = w;
  }
  if (j < hi && text[j] == '.') ++j;
  while (j < hi && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
  if (j != hi) return std::nullopt;
  return BoxedNumber{*value, i, num_end};
}

std::optional<BoxedNumber> last_parsing_box(std::string_view text) {
  static constexpr std::string_view kMarker = "\\boxed{";
  std::optional<BoxedNumber> best;
  std::size_t pos = 0;
  while ((pos = text.find(kMarker, pos)) != std::string_view::npos) {
    std::size_t lo = pos + kMarker.size();
    int depth = 1;
    std::size_t hi = lo;
    while (hi < text.size() && depth > 0) {
      if (text[hi] == '{') ++depth;
      if (text[hi] == '}') --depth;
      if (depth > 0) ++hi;
    }
    if (depth != 0) break;  // unbalanced tail, nothing further can close
    if (auto parsed = parse_box_content(text, lo, hi)) best = parsed;
    pos = hi + 1;
  }
  return best;
}

std::optional<BoxedNumber> last_standalone_number(std::string_view text) {
  std::optional<BoxedNumber> best;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_digit(text[i])) {
      ++i;
      continue;
    }
    std::size_t end = scan_number(text, i);
    bool bounded_left = true;
    if (i > 0) {
      char p = text[i - 1];
      if (std::isalnum(static_cast<unsigned char>(p)) || p == '.' || p == ',' || p == '-') {
        bounded_left = false;
      }
    }
    bool bounded_right =
        end >= text.size() || !std::isalpha(static_cast<unsigned char>(text[end]));
    if (bounded_left && bounded_right) {
      if (auto value = to_value(text.substr(i, end - i))) {
        best = BoxedNumber{*value, i, end};
      }
    }
    i = end;
  }
  return best;
}

}  // namespace

ParseResult parse_answer(std::string_view text, ParseMode mode) {
  ParseResult out;
  auto boxed = last_parsing_box(text);
  if (!boxed && mode == ParseMode::lenient) {
    boxed = last_standalone_number(text);
  }
  if (boxed) {
    out.value = boxed->value;
    out.matched_span = {boxed->begin, boxed->end};
  }
  return out;
}

double shaped_reward(double error, double delta, double alpha) {
  return std::max(0.0, 1.0 - std::pow(error / delta, alpha));
}

double binary_reward(double error, double delta) { return error < delta ? 1.0 : 0.0; }

double neg_mae_reward(double error) { return -error; }

double overlong_penalty(std::int64_t response_len, const OverlongConfig& cfg) {
  double p = static_cast<double>(response_len - cfg.expected_len) /
             static_cast<double>(cfg.buffer_len);
  return std::clamp(p, 0.0, 1.0);
}

RewardOutcome reward(const ParseResult& parsed, double truth, const RewardConfig& cfg,
                     std::optional<std::int64_t> response_len) {
  cfg.validate();
  if (truth < 0.0 || !std::isfinite(truth)) {
    throw std::invalid_argument("reward: truth must be a finite nonnegative duration");
  }

  RewardOutcome out;
  out.parsed = parsed;
  switch (cfg.kind) {
    case RewardKind::r0: {
      double e = parsed.ok() ? std::abs(*parsed.value - truth) : cfg.fail_error();
      out.error = e;
      out.reward = neg_mae_reward(e);
      break;
    }
    case RewardKind::r1: {
      if (parsed.ok()) {
        double e = std::abs(*parsed.value - truth);
        out.error = e;
        out.reward = binary_reward(e, cfg.delta);
      }
      break;
    }
    case RewardKind::r2: {
      if (parsed.ok()) {
        double e = std::abs(*parsed.value - truth);
        out.error = e;
        out.reward = shaped_reward(e, cfg.delta, cfg.alpha);
      }
      break;
    }
  }
  if (cfg.overlong && response_len) {
    out.overlong_penalty = overlong_penalty(*response_len, *cfg.overlong);
    out.reward -= out.overlong_penalty;
  }
  return out;
}

RewardOutcome score_text(std::string_view text, double truth, const RewardConfig& cfg,
                         ParseMode mode, std::optional<std::int64_t> response_len) {
  return reward(parse_answer(text, mode), truth, cfg, response_len);
}

double coverage(std::span<const RewardOutcome> outcomes) {
  if (outcomes.empty()) {
    throw std::invalid_argument("coverage: outcome list is empty");
  }
  std::size_t parsed = 0;
  for (const auto& o : outcomes) {
    if (o.parsed.ok()) ++parsed;
  }
  return static_cast<double>(parsed) / static_cast<double>(outcomes.size());
}

}  // namespace alertcast
