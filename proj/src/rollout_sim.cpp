#include "alertcast/rollout_sim.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "alertcast/format.hpp"
#include "alertcast/rng.hpp"

namespace alertcast {

std::optional<ErrorModel> parse_error_model(std::string_view s) {
  if (s == "gaussian") return ErrorModel::gaussian;
  if (s == "lognormal") return ErrorModel::lognormal_multiplicative;
  if (s == "oracle") return ErrorModel::oracle;
  return std::nullopt;
}

std::string_view error_model_name(ErrorModel m) {
  switch (m) {
    case ErrorModel::gaussian: return "gaussian";
    case ErrorModel::lognormal_multiplicative: return "lognormal";
    case ErrorModel::oracle: return "oracle";
  }
  return "gaussian";
}

void PolicyProfile::validate() const {
  if (sigma < 0.0) throw std::invalid_argument("policy profile: sigma must be >= 0");
  if (parse_discipline < 0.0 || parse_discipline > 1.0) {
    throw std::invalid_argument("policy profile: parse_discipline must lie in [0, 1]");
  }
  if (verbosity_mean < 1.0 || verbosity_spread < 0.0) {
    throw std::invalid_argument("policy profile: verbosity must be >= 1 token");
  }
  if (ratio_spread < 0.0) {
    throw std::invalid_argument("policy profile: ratio_spread must be >= 0");
  }
}

namespace {

constexpr std::string_view kRefusal =
    "Service disruption ongoing; crews are on site but no estimate is available yet.";

double noisy_prediction(double truth, const PolicyProfile& profile, Rng& rng) {
  switch (profile.error_model) {
    case ErrorModel::oracle: return truth;
    case ErrorModel::gaussian: return std::max(0.0, truth + rng.normal(0.0, profile.sigma));
    case ErrorModel::lognormal_multiplicative:
      return truth * rng.lognormal(0.0, profile.sigma);
  }
  return truth;
}

std::string boxed_response(double value) {
  return "Based on the alert the delay should conclude shortly; the estimated total is "
         "\\boxed{" +
         fmt_trim(value, 3) + "} minutes.";
}

}  // namespace

RolloutGroup sample_group(const Event& event, const PolicyProfile& profile,
                          const RewardConfig& cfg, int G, std::uint64_t seed) {
  if (G < 2) throw std::invalid_argument("sample_group: G must be >= 2");
  profile.validate();
  cfg.validate();

  RolloutGroup group;
  group.truth = event.duration_minutes;
  group.outcomes.reserve(static_cast<std::size_t>(G));
  group.lengths.reserve(static_cast<std::size_t>(G));
  std::vector<std::vector<double>> ratios;
  ratios.reserve(static_cast<std::size_t>(G));

  for (int i = 0; i < G; ++i) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));

    std::string text;
    if (rng.u01() < profile.parse_discipline) {
      text = boxed_response(noisy_prediction(event.duration_minutes, profile, rng));
    } else {
      text = kRefusal;
    }

    auto len = static_cast<std::int64_t>(
        std::llround(std::max(1.0, rng.normal(profile.verbosity_mean, profile.verbosity_spread))));
    len = std::max<std::int64_t>(len, 1);

    std::vector<double> w(static_cast<std::size_t>(len), 1.0);
    if (profile.ratio_spread > 0.0) {
      for (auto& wi : w) wi = rng.lognormal(0.0, profile.ratio_spread);
    }

    group.outcomes.push_back(score_text(text, event.duration_minutes, cfg, ParseMode::strict,
                                        len));
    group.lengths.push_back(len);
    ratios.push_back(std::move(w));
  }
  group.per_token_ratios = std::move(ratios);
  return group;
}

std::vector<StepSummary> simulate_training_signal(std::span<const Event> dataset,
                                                  const PolicyProfile& profile,
                                                  const RewardConfig& cfg, int steps,
                                                  std::uint64_t seed, int group_size,
                                                  double eps_norm) {
  if (dataset.empty()) {
    throw std::invalid_argument("simulate_training_signal: empty dataset");
  }
  if (steps < 1) {
    throw std::invalid_argument("simulate_training_signal: steps must be >= 1");
  }

  std::vector<StepSummary> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int step = 0; step < steps; ++step) {
    StepSummary s;
    s.step = step;
    double reward_sum = 0.0;
    double abs_adv_sum = 0.0;
    double coverage_sum = 0.0;
    std::size_t responses = 0;
    std::size_t kept = 0, all_correct = 0, all_wrong = 0;

    for (std::size_t i = 0; i < dataset.size(); ++i) {
      std::uint64_t group_seed = mix_seed(seed, static_cast<std::uint64_t>(step) * 0x10001 + i);
      RolloutGroup group = sample_group(dataset[i], profile, cfg, group_size, group_seed);

      AdvantageSet adv = group_advantages(group.rewards(), eps_norm);
      abs_adv_sum += adv.advantages.cwiseAbs().sum();
      for (const auto& o : group.outcomes) {
        reward_sum += o.reward;
        if (o.parsed.ok()) coverage_sum += 1.0;
      }
      responses += group.outcomes.size();

      std::size_t within = 0;
      for (const auto& o : group.outcomes) {
        if (is_equivalent(o, group.truth, cfg.delta)) ++within;
      }
      if (within == 0) {
        ++all_wrong;
      } else if (within == group.outcomes.size()) {
        ++all_correct;
      } else {
        ++kept;
      }
    }

    auto n_groups = static_cast<double>(dataset.size());
    auto n_resp = static_cast<double>(responses);
    s.mean_reward = reward_sum / n_resp;
    s.mean_abs_advantage = abs_adv_sum / n_resp;
    s.coverage = coverage_sum / n_resp;
    s.kept_rate = static_cast<double>(kept) / n_groups;
    s.drop_all_correct_rate = static_cast<double>(all_correct) / n_groups;
    s.drop_all_wrong_rate = static_cast<double>(all_wrong) / n_groups;
    out.push_back(s);
  }
  return out;
}

void write_summary_csv(std::ostream& out, std::span<const StepSummary> summaries) {
  out << "step,mean_reward,mean_abs_advantage,kept_rate,drop_all_correct_rate,"
         "drop_all_wrong_rate,coverage\n";
  for (const auto& s : summaries) {
    out << s.step << ',' << fmt_trim(s.mean_reward) << ',' << fmt_trim(s.mean_abs_advantage)
        << ',' << fmt_trim(s.kept_rate) << ',' << fmt_trim(s.drop_all_correct_rate) << ','
        << fmt_trim(s.drop_all_wrong_rate) << ',' << fmt_trim(s.coverage) << '\n';
  }
}

}  // namespace alertcast
