// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Criterion 8 needs a production events file (ALERTCAST_DATASET) and is
// skipped when none is present.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "alertcast/baselines.hpp"
#include "alertcast/format.hpp"
#include "alertcast/grpo.hpp"
#include "alertcast/ingestion.hpp"
#include "alertcast/metrics.hpp"
#include "alertcast/rng.hpp"
#include "alertcast/rollout_sim.hpp"
#include "alertcast/service.hpp"
#include "alertcast/verifier.hpp"
#include "httplib.h"
#include "nlohmann/json.hpp"
#include "support/metrics_oracle.hpp"

using namespace alertcast;
using nlohmann::json;

namespace {

enum class Verdict { pass, fail, skip };

struct Check {
  std::ostringstream detail;
  bool ok = true;

  void expect(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail << what;
    }
  }
};

// --- 1: reward property suite ----------------------------------------------

Verdict reward_properties(Check& c) {
  Rng rng(101);

  // (G1) large-alpha limit recovers the binary reward away from the edge
  for (int accepted = 0; accepted < 10000;) {
    double delta = rng.uniform(1.0, 120.0);
    double e = rng.uniform(0.0, 2.0 * delta);
    if (std::abs(e - delta) < 1e-3 * delta) continue;  // the limit is pointwise in e
    double gap = std::abs(shaped_reward(e, delta, 1e6) - binary_reward(e, delta));
    c.expect(gap < 1e-6, "G1 limit gap " + std::to_string(gap));
    ++accepted;
  }

  // (G2) monotone in error, monotone in tolerance, Lipschitz for alpha >= 1
  for (int i = 0; i < 10000; ++i) {
    double delta = rng.uniform(1.0, 120.0);
    double alpha = rng.uniform(0.2, 5.0);
    double e1 = rng.uniform(0.0, 2.0 * delta);
    double e2 = rng.uniform(0.0, 2.0 * delta);
    if (e1 > e2) std::swap(e1, e2);
    c.expect(shaped_reward(e1, delta, alpha) >= shaped_reward(e2, delta, alpha),
             "G2 error monotonicity");
    double d2 = delta * rng.uniform(1.0, 4.0);
    double e = rng.uniform(0.0, 2.0 * delta);
    c.expect(shaped_reward(e, delta, alpha) <= shaped_reward(e, d2, alpha) + 1e-15,
             "G2 tolerance monotonicity");

    double la = rng.uniform(1.0, 4.0);
    double lhs = std::abs(shaped_reward(e1, delta, la) - shaped_reward(e2, delta, la));
    c.expect(lhs <= (la / delta) * std::abs(e1 - e2) + 1e-12, "G2 Lipschitz bound");
  }

  // (G3) alpha hardening inside the band
  for (int i = 0; i < 10000; ++i) {
    double delta = rng.uniform(1.0, 120.0);
    double e = rng.uniform(1e-9, delta * (1.0 - 1e-9));
    double a1 = rng.uniform(0.2, 5.0);
    double a2 = a1 + rng.uniform(0.0, 5.0);
    c.expect(shaped_reward(e, delta, a1) <= shaped_reward(e, delta, a2) + 1e-15,
             "G3 alpha hardening");
  }

  // (G4) scale invariance
  const double alphas[] = {0.5, 1.0, 2.0, 4.0};
  for (int i = 0; i < 10000; ++i) {
    double delta = rng.uniform(1.0, 120.0);
    double e = rng.uniform(0.0, 2.0 * delta);
    double alpha = alphas[rng.bounded(4)];
    double k = std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
    double gap = std::abs(shaped_reward(e, delta, alpha) - shaped_reward(k * e, k * delta, alpha));
    c.expect(gap < 1e-12, "G4 scale invariance gap " + std::to_string(gap));
  }

  // (G5) tolerance limits
  for (double alpha : {0.5, 1.0, 2.0}) {
    c.expect(shaped_reward(3.0, 1e-12, alpha) == 0.0, "G5 delta -> 0");
    c.expect(shaped_reward(3.0, 1e15, alpha) > 1.0 - 1e-6, "G5 delta -> inf");
  }
  return c.ok ? Verdict::pass : Verdict::fail;
}

// --- 2: sensitivity bound ---------------------------------------------------

Verdict sensitivity_bound(Check& c) {
  Rng rng(202);
  const double deltas[] = {5.0, 10.0, 30.0, 60.0, 120.0};
  const double alphas[] = {1.0, 2.0};
  std::size_t violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    double delta = deltas[rng.bounded(5)];
    double alpha = alphas[rng.bounded(2)];
    std::vector<double> errors(8), perturbed(8);
    for (int i = 0; i < 8; ++i) {
      errors[i] = rng.uniform(0.0, 2.0 * delta);
      perturbed[i] = std::max(0.0, errors[i] + rng.uniform(-delta / 10.0, delta / 10.0));
    }
    auto check = advantage_sensitivity_bound(errors, perturbed, delta, alpha, 1e-6);
    if (!check.holds) ++violations;
  }
  c.detail << "violations=" << violations << "/10000";
  c.ok = violations == 0;
  return c.ok ? Verdict::pass : Verdict::fail;
}

// --- 3: metrics oracle equivalence -----------------------------------------

Verdict metrics_equivalence(Check& c) {
  Rng rng(303);
  for (int trial = 0; trial < 1000 && c.ok; ++trial) {
    std::vector<PredPair> pairs(1 + rng.bounded(1000));
    for (auto& p : pairs) {
      p.truth = rng.uniform(0.0, 240.0);
      if (rng.u01() < 0.9) p.pred = std::max(0.0, p.truth + rng.normal(0.0, 40.0));
    }
    auto fast = evaluate(pairs, default_grid());
    auto slow = testing::evaluate_oracle(pairs, default_grid());
    for (std::size_t k = 0; k < fast.grid.size(); ++k) {
      c.expect(fast.acc[k] == slow.acc[k], "acc mismatch");
      c.expect(fast.soft[k] == slow.soft[k], "soft mismatch");
      c.expect(fast.soft[k] <= fast.acc[k] + 1e-12, "soft exceeds acc");
      if (k > 0) {
        c.expect(fast.acc[k] >= fast.acc[k - 1], "acc not monotone");
        c.expect(fast.soft[k] >= fast.soft[k - 1] - 1e-12, "soft not monotone");
      }
    }
    c.expect(fast.coverage == slow.coverage, "coverage mismatch");
    if (fast.coverage > 0.0) {
      c.expect(fast.mae == slow.mae, "mae mismatch");
      c.expect(fast.mse == slow.mse, "mse mismatch");
    }
  }
  return c.ok ? Verdict::pass : Verdict::fail;
}

// --- 4: surrogate checks ----------------------------------------------------

RolloutGroup group_of(std::vector<double> rewards, std::vector<std::vector<double>> ratios) {
  RolloutGroup g;
  for (double r : rewards) {
    RewardOutcome o;
    o.reward = r;
    g.outcomes.push_back(o);
  }
  for (const auto& seq : ratios) g.lengths.push_back(static_cast<std::int64_t>(seq.size()));
  g.per_token_ratios = std::move(ratios);
  return g;
}

Verdict surrogate_checks(Check& c) {
  Rng rng(404);

  // ratio-1 identity: zero under group normalization with spread
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd r(8);
    for (int i = 0; i < 8; ++i) r[i] = rng.uniform(0.0, 1.0);
    r[0] += 0.25;
    auto adv = group_advantages(r, 0.0);
    std::vector<std::vector<double>> ratios;
    std::vector<double> rewards;
    for (int i = 0; i < 8; ++i) {
      ratios.emplace_back(1 + rng.bounded(6), 1.0);
      rewards.push_back(r[i]);
    }
    auto g = group_of(rewards, ratios);
    c.expect(std::abs(grpo_surrogate(g, adv, 0.2)) < 1e-12, "ratio-1 identity");
  }

  // hand-computed clip branches
  AdvantageSet adv;
  adv.advantages = Eigen::VectorXd(2);
  adv.advantages << 1.0, -1.0;
  auto hand = group_of({1.0, 0.0}, {{2.0}, {0.5}});
  double grpo = grpo_surrogate(hand, adv, 0.2);
  c.expect(std::abs(grpo - (1.2 - 0.8) / 2.0) < 1e-12,
           "clip case: got " + std::to_string(grpo));

  // coincidence under equal lengths and symmetric clips
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t len = 1 + rng.bounded(6);
    std::vector<std::vector<double>> ratios;
    std::vector<double> rewards;
    for (int i = 0; i < 8; ++i) {
      std::vector<double> seq(len);
      for (auto& w : seq) w = std::exp(rng.uniform(-1.0, 1.0));
      ratios.push_back(std::move(seq));
      rewards.push_back(rng.uniform(0.0, 1.0));
    }
    auto g = group_of(rewards, ratios);
    auto a = group_advantages(g.rewards(), 1e-6);
    c.expect(std::abs(grpo_surrogate(g, a, 0.2) -
                      dapo_surrogate(g, a, ClipConfig::asymmetric(0.2, 0.2))) < 1e-12,
             "grpo/dapo coincidence");
  }

  // dual-clip floor engages exactly when the standard term falls below c*A
  auto mild = group_of({1.0, 0.0}, {{1.0}, {0.05}});
  c.expect(std::abs(dapo_surrogate(mild, adv, ClipConfig::asymmetric(0.2, 0.28, 10.0)) -
                    (1.0 - 0.8) / 2.0) < 1e-12,
           "dual clip must not engage at w=0.05");
  auto wild = group_of({1.0, 0.0}, {{1.0}, {15.0}});
  c.expect(std::abs(dapo_surrogate(wild, adv, ClipConfig::asymmetric(0.2, 0.28, 10.0)) -
                    (1.0 - 10.0) / 2.0) < 1e-12,
           "dual clip must floor at c*A");
  c.expect(std::abs(dapo_surrogate(wild, adv, ClipConfig::asymmetric(0.2, 0.28)) -
                    (1.0 - 15.0) / 2.0) < 1e-12,
           "unfloored term without dual clip");
  return c.ok ? Verdict::pass : Verdict::fail;
}

// --- 5: dynamic sampling filter ---------------------------------------------

Verdict filter_behavior(Check& c) {
  auto dataset = generate_synthetic(1000, 505);
  RewardConfig cfg;
  cfg.kind = RewardKind::r2;
  cfg.delta = 10.0;
  cfg.alpha = 2.0;

  PolicyProfile oracle;
  oracle.error_model = ErrorModel::oracle;
  auto perfect = simulate_training_signal(dataset, oracle, cfg, 1, 1);
  c.expect(perfect[0].drop_all_correct_rate == 1.0, "oracle profile must drop all-correct");

  PolicyProfile silent;
  silent.parse_discipline = 0.0;
  auto mute = simulate_training_signal(dataset, silent, cfg, 1, 1);
  c.expect(mute[0].drop_all_wrong_rate == 1.0, "zero discipline must drop all-wrong");

  PolicyProfile mixed;
  mixed.error_model = ErrorModel::gaussian;
  mixed.sigma = cfg.delta;
  mixed.parse_discipline = 0.9;
  auto blend = simulate_training_signal(dataset, mixed, cfg, 1, 1);
  c.detail << "mixed kept_rate=" << blend[0].kept_rate;
  c.expect(blend[0].kept_rate > 0.0 && blend[0].kept_rate < 1.0,
           " mixed profile kept fraction not in (0,1)");
  return c.ok ? Verdict::pass : Verdict::fail;
}

// --- 6: simulator calibration ------------------------------------------------

Verdict simulator_calibration(Check& c) {
  PolicyProfile profile;
  profile.error_model = ErrorModel::gaussian;
  profile.sigma = 10.0;
  profile.verbosity_mean = 8.0;

  RewardConfig cfg;
  cfg.kind = RewardKind::r1;
  cfg.delta = 10.0;

  Event e = make_event("cal",
                       {{"cal", 0, "trains are delayed", std::nullopt},
                        {"cal", 500 * 60, "delays cleared", std::nullopt}},
                       "delays");

  double sum = 0.0;
  std::size_t n = 0;
  for (int g = 0; g < 100000; ++g) {
    auto group = sample_group(e, profile, cfg, 8, mix_seed(606, g));
    for (const auto& o : group.outcomes) {
      sum += o.reward;
      ++n;
    }
  }
  double mean = sum / static_cast<double>(n);
  double expected = std::erf(1.0 / std::sqrt(2.0));  // 2 Phi(1) - 1
  c.detail << "mean_reward=" << mean << " target=" << expected;
  c.ok = std::abs(mean - expected) < 0.01;
  return c.ok ? Verdict::pass : Verdict::fail;
}

// --- 7: baseline direction checks --------------------------------------------

ToleranceReport eval_model(const RegressorModel& model, const std::vector<const Event*>& test) {
  std::vector<PredPair> pairs(test.size());
  std::atomic<std::size_t> next{0};
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < test.size(); i = next.fetch_add(1)) {
        pairs[i] = {predict(model, *test[i]), test[i]->duration_minutes};
      }
    });
  }
  for (auto& th : pool) th.join();
  return evaluate(pairs, default_grid());
}

Verdict baseline_directions(Check& c) {
  auto events = generate_synthetic(20000, 707);
  auto split = make_split(events, 707, 0.8);
  std::set<std::string> train_ids(split.train_ids.begin(), split.train_ids.end());

  std::vector<Event> train;
  std::vector<const Event*> test;
  for (const auto& e : events) {
    if (train_ids.count(e.id)) {
      train.push_back(e);
    } else {
      test.push_back(&e);
    }
  }

  BaselineConfig global_cfg{RegressorKind::global_mean};
  BaselineConfig category_cfg{RegressorKind::category_mean};
  BaselineConfig knn_cfg{RegressorKind::knn};
  knn_cfg.k = 5;
  knn_cfg.d = 256;

  auto global = eval_model(fit(global_cfg, train), test);
  auto category = eval_model(fit(category_cfg, train), test);
  auto knn = eval_model(fit(knn_cfg, train), test);

  c.detail << "acc@5 global=" << global.acc[0] << " category=" << category.acc[0]
           << " knn=" << knn.acc[0] << "; mae global=" << global.mae
           << " category=" << category.mae;
  c.expect(category.acc[0] > global.acc[0], " category-mean must beat global acc@5");
  c.expect(category.mae < global.mae, " category-mean must beat global mae");
  c.expect(knn.acc[0] > category.acc[0], " knn must beat category-mean acc@5");
  return c.ok ? Verdict::pass : Verdict::fail;
}

// --- 8: conditional production-data reproduction ------------------------------

Verdict production_reproduction(Check& c) {
  const char* path = std::getenv("ALERTCAST_DATASET");
  if (path == nullptr || std::string(path).empty()) {
    c.detail << "ALERTCAST_DATASET not set";
    return Verdict::skip;
  }
  std::ifstream in(path);
  if (!in) {
    c.detail << "cannot open " << path;
    return Verdict::skip;
  }
  ParseTally tally;
  auto events = read_events_jsonl(in, tally);
  if (events.size() < 1000) {
    c.detail << "dataset too small (" << events.size() << " events)";
    return Verdict::skip;
  }

  auto split = make_split(events, 0, 0.8);
  std::set<std::string> train_ids(split.train_ids.begin(), split.train_ids.end());
  std::vector<Event> train;
  std::vector<const Event*> test;
  for (const auto& e : events) {
    if (train_ids.count(e.id)) {
      train.push_back(e);
    } else {
      test.push_back(&e);
    }
  }

  auto global = eval_model(fit(BaselineConfig{RegressorKind::global_mean}, train), test);
  auto category = eval_model(fit(BaselineConfig{RegressorKind::category_mean}, train), test);

  c.detail << "global mae=" << global.mae << " acc@5=" << global.acc[0]
           << " acc@60=" << global.acc[3] << "; category acc@5=" << category.acc[0];
  c.expect(std::abs(global.mae - 50.59) <= 0.02 * 50.59, " global mae off");
  c.expect(std::abs(global.acc[0] - 0.031) <= 0.01, " global acc@5 off");
  c.expect(std::abs(global.acc[3] - 0.914) <= 0.02, " global acc@60 off");
  c.expect(std::abs(category.acc[0] - 0.226) <= 0.03, " category acc@5 off");
  return c.ok ? Verdict::pass : Verdict::fail;
}

// --- 9: service equivalence ----------------------------------------------------

json random_score_request(Rng& rng) {
  json req;
  req["truth_minutes"] = rng.uniform(0.0, 240.0);
  json responses = json::array();
  auto n = 1 + rng.bounded(8);
  for (std::uint64_t i = 0; i < n; ++i) {
    double roll = rng.u01();
    if (roll < 0.7) {
      responses.push_back("the total delay comes to \\boxed{" +
                          fmt_trim(rng.uniform(0.0, 300.0), 3) + "} minutes");
    } else if (roll < 0.85) {
      responses.push_back("roughly " + std::to_string(rng.bounded(200)) +
                          " but nothing boxed");
    } else {
      responses.push_back("no estimate available");
    }
  }
  req["responses"] = std::move(responses);
  const char* kinds[] = {"r0", "r1", "r2"};
  req["reward"] = {{"kind", kinds[rng.bounded(3)]},
                   {"delta", rng.uniform(1.0, 120.0)},
                   {"alpha", rng.uniform(0.5, 4.0)}};
  req["want_advantages"] = rng.u01() < 0.5;
  if (rng.u01() < 0.3) req["eps_norm"] = rng.uniform(0.0, 1e-3);
  return req;
}

Verdict service_equivalence(Check& c) {
  ServiceConfig cfg;
  RewardService service(cfg);
  int port = service.start_async();
  if (port <= 0) {
    c.ok = false;
    c.detail << "could not bind a port";
    return Verdict::fail;
  }

  Rng rng(909);
  std::vector<std::string> bodies(500);
  std::vector<std::string> expected(500);
  std::vector<json> requests(500);
  for (int i = 0; i < 500; ++i) {
    requests[i] = random_score_request(rng);
    bodies[i] = requests[i].dump();
    expected[i] = score_request_json(requests[i], cfg).dump();
  }

  httplib::Client client("127.0.0.1", port);
  std::size_t mismatches = 0;
  for (int i = 0; i < 500; ++i) {
    auto res = client.Post("/v1/score", bodies[i], "application/json");
    if (!res || res->status != 200 || res->body != expected[i]) ++mismatches;
  }
  c.expect(mismatches == 0,
           "sequential mismatches=" + std::to_string(mismatches));

  // 64-way concurrent replay of the same request pool
  std::atomic<std::size_t> concurrent_mismatches{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < 64; ++t) {
    pool.emplace_back([&, t] {
      httplib::Client worker("127.0.0.1", port);
      for (int i = t; i < 500; i += 64) {
        auto res = worker.Post("/v1/score", bodies[i], "application/json");
        if (!res || res->status != 200 || res->body != expected[i]) {
          concurrent_mismatches.fetch_add(1);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  c.expect(concurrent_mismatches.load() == 0,
           " concurrent mismatches=" + std::to_string(concurrent_mismatches.load()));
  c.detail << "500 sequential + 64-way concurrent replays";
  service.stop();
  return c.ok ? Verdict::pass : Verdict::fail;
}

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;
  std::function<Verdict(Check&)> run;
};

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "reward property suite (G1-G5, Lipschitz)", 10.0, reward_properties},
      {2, "normalized-advantage sensitivity bound", 30.0, sensitivity_bound},
      {3, "metrics oracle equivalence + monotonicity", 0.0, metrics_equivalence},
      {4, "grpo/dapo surrogate checks", 0.0, surrogate_checks},
      {5, "dynamic-sampling filter edge cases", 0.0, filter_behavior},
      {6, "simulator calibration against the gaussian band", 0.0, simulator_calibration},
      {7, "baseline direction checks on synthetic data", 300.0, baseline_directions},
      {8, "production-data reproduction (conditional)", 0.0, production_reproduction},
      {9, "service/library bit-identical scoring", 0.0, service_equivalence},
  };

  int failures = 0;
  for (auto& criterion : criteria) {
    Check check;
    auto start = std::chrono::steady_clock::now();
    Verdict verdict = Verdict::fail;
    try {
      verdict = criterion.run(check);
    } catch (const std::exception& e) {
      check.ok = false;
      check.detail << "exception: " << e.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (verdict == Verdict::pass && criterion.time_limit_s > 0.0 &&
        elapsed > criterion.time_limit_s) {
      verdict = Verdict::fail;
      check.detail << " exceeded " << criterion.time_limit_s << "s budget";
    }

    const char* tag = verdict == Verdict::pass ? "PASS" : verdict == Verdict::skip ? "SKIP" : "FAIL";
    std::cout << "[" << tag << "] " << criterion.id << ". " << criterion.name;
    auto detail = check.detail.str();
    if (!detail.empty()) std::cout << " -- " << detail;
    std::printf(" (%.2fs)\n", elapsed);
    if (verdict == Verdict::fail) ++failures;
  }

  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
