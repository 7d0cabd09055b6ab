#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "alertcast/alert_model.hpp"
#include "alertcast/baselines.hpp"
#include "alertcast/format.hpp"
#include "alertcast/grpo.hpp"
#include "alertcast/ingestion.hpp"
#include "alertcast/metrics.hpp"
#include "alertcast/prompts.hpp"
#include "alertcast/rollout_sim.hpp"
#include "alertcast/service.hpp"
#include "alertcast/verifier.hpp"
#include "nlohmann/json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace alertcast;

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

std::vector<Event> load_events(const std::string& path) {
  auto in = open_input(path);
  ParseTally tally;
  auto events = read_events_jsonl(in, tally);
  if (tally.malformed > 0) {
    std::cerr << "warning: " << tally.malformed << " malformed event line(s) skipped in "
              << path << "\n";
  }
  if (events.empty()) throw std::runtime_error("no events in " + path);
  return events;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> grid;
  std::stringstream ss(spec);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    grid.push_back(std::stod(cell));
  }
  if (grid.empty()) throw std::invalid_argument("empty tolerance grid: " + spec);
  return grid;
}

std::string trim_copy(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// Flat key=value config files with '#' comments. Entries become trailing
// long options of the chosen subcommand; keys already given on the command
// line are dropped, so flags take precedence.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      break;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw std::invalid_argument("cannot open config file: " + config_path);

  std::set<std::string> given;
  for (const auto& a : args) {
    if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));
  }

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim_copy(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(config_path + ":" + std::to_string(lineno) +
                                  ": expected key=value");
    }
    std::string key = trim_copy(line.substr(0, eq));
    std::string value = trim_copy(line.substr(eq + 1));
    if (key.empty() || key == "config") continue;
    if (given.count("--" + key)) continue;
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

// effective option values, one line per run, so outputs are attributable
void log_resolved_config(const CLI::App& cmd) {
  std::ostringstream os;
  os << "config: " << cmd.get_name();
  for (const CLI::Option* opt : cmd.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames()[0];
    if (name == "help" || name == "config") continue;
    std::string value;
    if (!opt->results().empty()) {
      for (const auto& r : opt->results()) {
        if (!value.empty()) value += ';';
        value += r;
      }
    } else {
      value = opt->get_default_str();
    }
    if (value.empty()) continue;
    os << ' ' << name << '=' << value;
  }
  std::cerr << os.str() << '\n';
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2 * threads) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

json outcome_to_json(const RewardOutcome& o) {
  json j;
  if (o.parsed.ok()) {
    j["parsed"] = *o.parsed.value;
  } else {
    j["parsed"] = nullptr;
  }
  if (o.error) {
    j["error"] = *o.error;
  } else {
    j["error"] = nullptr;
  }
  j["reward"] = o.reward;
  j["overlong_penalty"] = o.overlong_penalty;
  return j;
}

void write_eval_csv(std::ostream& out, const ToleranceReport& r) {
  out << "delta,acc,soft,mae,mse,coverage,n\n";
  for (std::size_t k = 0; k < r.grid.size(); ++k) {
    out << fmt_trim(r.grid[k]) << ',' << fmt_trim(r.acc[k]) << ',' << fmt_trim(r.soft[k]) << ','
        << fmt_trim(r.mae) << ',' << fmt_trim(r.mse) << ',' << fmt_trim(r.coverage) << ',' << r.n
        << '\n';
  }
}

struct PredFile {
  // pairs joined against truth events (or self-contained pred/truth lines)
  std::vector<PredPair> pairs;
  std::size_t malformed = 0;
  std::size_t unmatched = 0;
};

PredFile load_predictions(const std::string& path, const std::vector<Event>* truth) {
  std::map<std::string, double> truth_by_id;
  if (truth) {
    for (const auto& e : *truth) truth_by_id[e.id] = e.duration_minutes;
  }
  PredFile out;
  auto in = open_input(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      ++out.malformed;
      continue;
    }
    std::optional<double> pred;
    if (j.contains("pred") && j["pred"].is_number()) pred = j["pred"].get<double>();
    if (j.contains("truth") && j["truth"].is_number()) {
      out.pairs.push_back({pred, j["truth"].get<double>()});
      continue;
    }
    if (!j.contains("event_id") || !j["event_id"].is_string()) {
      ++out.malformed;
      continue;
    }
    if (!truth) throw std::runtime_error("prediction line has event_id but no --truth given");
    auto it = truth_by_id.find(j["event_id"].get<std::string>());
    if (it == truth_by_id.end()) {
      ++out.unmatched;
      continue;
    }
    out.pairs.push_back({pred, it->second});
  }
  return out;
}

// --- subcommand options -----------------------------------------------------

struct IngestOpts {
  std::string in, out;
};
struct GenerateOpts {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::string out;
};
struct StatsOpts {
  std::string events, split, out;
};
struct SplitOpts {
  std::string events, out;
  std::uint64_t seed = 0;
  double fraction = 0.8;
};
struct PromptOpts {
  std::string events, stats, out, variant = "p1";
  std::size_t max_chars = 8192;
};
struct ScoreOpts {
  std::string in, out, reward = "r2";
  double delta = 10.0, alpha = 2.0;
  double parse_fail_error = -1.0;  // <0: default to delta
  bool lenient = false;
  std::int64_t expected_len = 0, buffer_len = 0;
};
struct AdvOpts {
  std::string in, out, reward = "r2";
  double delta = 10.0, alpha = 2.0, eps_norm = 1e-6;
  double eps = 0.2, eps_low = 0.2, eps_high = 0.28, dual_clip_c = 10.0;
};
struct BaselineOpts {
  std::string kind = "global-mean", events, split, out, features = "hash";
  int d = 256, k = 5;
  double lambda = 1.0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};
struct EvalOpts {
  std::string pred, truth, out, grid = "5,10,30,60,120";
};
struct SweepOpts {
  std::vector<std::string> preds;
  std::string truth, out, grid = "5,10,30,60,120";
};
struct SimulateOpts {
  std::string profile = "gaussian", reward = "r2", events, out;
  double sigma = 5.0, discipline = 1.0, delta = 10.0, alpha = 2.0;
  int g = 8, steps = 5;
  std::uint64_t seed = 0;
  std::size_t synthetic_n = 256;
};
struct ServeOpts {
  int port = 8787;
  std::size_t max_body_bytes = 4 * 1024 * 1024;
  double default_delta = 10.0, default_alpha = 2.0;
};

RewardConfig reward_from_flags(const std::string& kind, double delta, double alpha,
                               double parse_fail_error = -1.0, std::int64_t expected_len = 0,
                               std::int64_t buffer_len = 0) {
  auto parsed = parse_reward_kind(kind);
  if (!parsed) throw std::invalid_argument("unknown reward kind: " + kind);
  RewardConfig cfg;
  cfg.kind = *parsed;
  cfg.delta = delta;
  cfg.alpha = alpha;
  if (parse_fail_error >= 0.0) cfg.parse_fail_error = parse_fail_error;
  if (buffer_len > 0) cfg.overlong = OverlongConfig{expected_len, buffer_len};
  cfg.validate();
  return cfg;
}

// --- subcommand bodies -------------------------------------------------------

int run_ingest(const IngestOpts& o) {
  auto in = open_input(o.in);
  ParseTally tally;
  auto records = read_alerts_jsonl(in, tally);
  auto result = finalize_boundaries(link_events(records), TerminalPhraseRules::defaults());
  auto out = open_output(o.out);
  write_events_jsonl(out, result.kept);
  std::cout << "ingest: kept=" << result.kept.size() << " excluded=" << result.excluded
            << " malformed=" << tally.malformed << "\n";
  return 0;
}

int run_generate(const GenerateOpts& o) {
  auto events = generate_synthetic(o.n, o.seed);
  auto out = open_output(o.out);
  write_events_jsonl(out, events);
  std::cout << "generate: events=" << events.size() << " seed=" << o.seed << "\n";
  return 0;
}

int run_stats(const StatsOpts& o) {
  auto events = load_events(o.events);
  std::vector<Event> subset;
  if (!o.split.empty()) {
    auto split_in = open_input(o.split);
    auto split = read_split_json(split_in);
    std::set<std::string> train(split.train_ids.begin(), split.train_ids.end());
    for (auto& e : events) {
      if (train.count(e.id)) subset.push_back(std::move(e));
    }
    if (subset.empty()) throw std::runtime_error("no training events matched the split file");
  } else {
    subset = std::move(events);
  }
  auto table = build_stats(subset);
  auto out = open_output(o.out);
  write_stats_csv(out, table);
  std::cout << "stats: categories=" << table.rows.size() << " events=" << subset.size() << "\n";
  return 0;
}

int run_split(const SplitOpts& o) {
  auto events = load_events(o.events);
  auto split = make_split(events, o.seed, o.fraction);
  auto out = open_output(o.out);
  write_split_json(out, split);
  std::cout << "split: train=" << split.train_ids.size() << " test=" << split.test_ids.size()
            << "\n";
  return 0;
}

int run_prompts(const PromptOpts& o) {
  auto variant = parse_prompt_variant(o.variant);
  if (!variant) throw std::invalid_argument("unknown prompt variant: " + o.variant);
  auto events = load_events(o.events);

  StatsTable stats;
  const StatsTable* stats_ptr = nullptr;
  if (*variant == PromptVariant::p3) {
    if (o.stats.empty()) throw std::invalid_argument("p3 prompts require --stats");
    auto stats_in = open_input(o.stats);
    stats = read_stats_csv(stats_in);
    stats_ptr = &stats;
  }
  const CategoryTaxonomy* taxonomy =
      *variant == PromptVariant::p1 ? nullptr : &default_taxonomy();

  PromptOptions options;
  options.max_chars = o.max_chars;
  auto out = open_output(o.out);
  for (const auto& e : events) {
    json j;
    j["event_id"] = e.id;
    j["variant"] = std::string(prompt_variant_name(*variant));
    j["prompt"] = render_prompt(e, *variant, taxonomy, stats_ptr, options);
    out << j.dump() << '\n';
  }
  std::cout << "render-prompts: events=" << events.size() << " variant=" << o.variant << "\n";
  return 0;
}

int run_score(const ScoreOpts& o) {
  RewardConfig cfg = reward_from_flags(o.reward, o.delta, o.alpha, o.parse_fail_error,
                                       o.expected_len, o.buffer_len);
  ParseMode mode = o.lenient ? ParseMode::lenient : ParseMode::strict;

  auto in = open_input(o.in);
  auto out = open_output(o.out);
  std::string line;
  std::size_t scored = 0, malformed = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("truth_minutes") ||
        !j["truth_minutes"].is_number() || !j.contains("response_text") ||
        !j["response_text"].is_string()) {
      ++malformed;
      continue;
    }
    std::optional<std::int64_t> len;
    if (j.contains("response_len") && j["response_len"].is_number_integer()) {
      len = j["response_len"].get<std::int64_t>();
    }
    auto outcome = score_text(j["response_text"].get<std::string>(),
                              j["truth_minutes"].get<double>(), cfg, mode, len);
    out << outcome_to_json(outcome).dump() << '\n';
    ++scored;
  }
  std::cout << "score: scored=" << scored << " malformed=" << malformed << "\n";
  return 0;
}

int run_advantages(const AdvOpts& o) {
  RewardConfig cfg = reward_from_flags(o.reward, o.delta, o.alpha);
  auto in = open_input(o.in);
  auto out = open_output(o.out);
  std::string line;
  std::size_t groups = 0, malformed = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("truth") ||
        !j["truth"].is_number() || !j.contains("responses") || !j["responses"].is_array() ||
        j["responses"].size() < 2) {
      ++malformed;
      continue;
    }

    RolloutGroup group;
    group.truth = j["truth"].get<double>();
    bool ok = true;
    for (const auto& r : j["responses"]) {
      if (!r.is_object()) {
        ok = false;
        break;
      }
      RewardOutcome outcome;
      if (r.contains("text") && r["text"].is_string()) {
        outcome = score_text(r["text"].get<std::string>(), group.truth, cfg);
      } else if (r.contains("parsed")) {
        ParseResult p;
        if (r["parsed"].is_number()) p.value = r["parsed"].get<double>();
        outcome = reward(p, group.truth, cfg);
      } else {
        ok = false;
        break;
      }
      group.outcomes.push_back(std::move(outcome));
      if (r.contains("len") && r["len"].is_number_integer()) {
        group.lengths.push_back(r["len"].get<std::int64_t>());
      }
    }
    if (!ok) {
      ++malformed;
      continue;
    }
    if (j.contains("ratios") && j["ratios"].is_array()) {
      std::vector<std::vector<double>> ratios;
      for (const auto& seq : j["ratios"]) {
        ratios.push_back(seq.get<std::vector<double>>());
      }
      group.per_token_ratios = std::move(ratios);
    }

    auto adv = group_advantages(group.rewards(), o.eps_norm);
    json result;
    json advantages = json::array();
    for (Eigen::Index i = 0; i < adv.advantages.size(); ++i) {
      advantages.push_back(adv.advantages[i]);
    }
    json rewards = json::array();
    for (const auto& outcome : group.outcomes) rewards.push_back(outcome.reward);
    result["advantages"] = std::move(advantages);
    result["rewards"] = std::move(rewards);
    result["group_mean"] = adv.group_mean;
    result["group_std"] = adv.group_std;

    if (group.per_token_ratios) {
      result["grpo_surrogate"] = grpo_surrogate(group, adv, o.eps);
      result["dapo_surrogate"] = dapo_surrogate(
          group, adv, ClipConfig::asymmetric(o.eps_low, o.eps_high, o.dual_clip_c));
    } else {
      result["grpo_surrogate"] = nullptr;
      result["dapo_surrogate"] = nullptr;
    }

    std::size_t within = 0;
    for (const auto& outcome : group.outcomes) {
      if (is_equivalent(outcome, group.truth, cfg.delta)) ++within;
    }
    result["filter"] = within == 0                       ? "all_wrong"
                       : within == group.outcomes.size() ? "all_correct"
                                                         : "kept";
    out << result.dump() << '\n';
    ++groups;
  }
  std::cout << "advantages: groups=" << groups << " malformed=" << malformed << "\n";
  return 0;
}

int run_baseline(const BaselineOpts& o) {
  auto kind = parse_regressor_kind(o.kind);
  if (!kind) throw std::invalid_argument("unknown baseline kind: " + o.kind);

  BaselineConfig cfg;
  cfg.kind = *kind;
  cfg.d = o.d;
  cfg.k = o.k;
  cfg.lambda = o.lambda;
  if (o.features == "m1") {
    cfg.features = FeatureKind::m1;
  } else if (o.features != "hash") {
    throw std::invalid_argument("unknown feature kind: " + o.features);
  }
  cfg.validate();

  auto events = load_events(o.events);
  auto split_in = open_input(o.split);
  auto split = read_split_json(split_in);
  std::set<std::string> train_ids(split.train_ids.begin(), split.train_ids.end());
  std::set<std::string> test_ids(split.test_ids.begin(), split.test_ids.end());

  std::vector<Event> train;
  std::vector<const Event*> test;
  for (const auto& e : events) {
    if (train_ids.count(e.id)) {
      train.push_back(e);
    } else if (test_ids.count(e.id)) {
      test.push_back(&e);
    }
  }
  if (train.empty() || test.empty()) {
    throw std::runtime_error("split produced an empty train or test fold");
  }

  auto model = fit(cfg, train);
  std::vector<double> preds(test.size());
  parallel_for(test.size(), o.threads,
               [&](std::size_t i) { preds[i] = predict(model, *test[i]); });

  auto out = open_output(o.out);
  for (std::size_t i = 0; i < test.size(); ++i) {
    json j;
    j["event_id"] = test[i]->id;
    j["pred"] = preds[i];
    out << j.dump() << '\n';
  }
  std::cout << "baseline: kind=" << o.kind << " train=" << train.size()
            << " test=" << test.size() << "\n";
  return 0;
}

int run_eval(const EvalOpts& o) {
  auto grid = parse_grid(o.grid);
  std::vector<Event> truth;
  if (!o.truth.empty()) truth = load_events(o.truth);
  auto pred = load_predictions(o.pred, o.truth.empty() ? nullptr : &truth);
  if (pred.pairs.empty()) throw std::runtime_error("no usable prediction pairs in " + o.pred);
  auto report = evaluate(pred.pairs, grid);
  auto out = open_output(o.out);
  write_eval_csv(out, report);
  std::cout << "eval: pairs=" << pred.pairs.size() << " malformed=" << pred.malformed
            << " unmatched=" << pred.unmatched << "\n";
  return 0;
}

int run_sweep(const SweepOpts& o) {
  auto grid = parse_grid(o.grid);
  auto truth = load_events(o.truth);
  auto out = open_output(o.out);

  out << "run,mae,mse";
  for (double c : grid) out << ",acc@" << fmt_trim(c);
  for (double c : grid) out << ",soft@" << fmt_trim(c);
  out << ",coverage,n\n";

  for (const auto& path : o.preds) {
    auto pred = load_predictions(path, &truth);
    if (pred.pairs.empty()) throw std::runtime_error("no usable prediction pairs in " + path);
    auto report = evaluate(pred.pairs, grid);
    out << fs::path(path).stem().string() << ',' << fmt_trim(report.mae) << ','
        << fmt_trim(report.mse);
    for (double acc : report.acc) out << ',' << fmt_trim(acc);
    for (double soft : report.soft) out << ',' << fmt_trim(soft);
    out << ',' << fmt_trim(report.coverage) << ',' << report.n << '\n';
  }
  std::cout << "sweep: runs=" << o.preds.size() << "\n";
  return 0;
}

int run_simulate(const SimulateOpts& o) {
  PolicyProfile profile;
  auto model = parse_error_model(o.profile);
  if (!model) throw std::invalid_argument("unknown profile: " + o.profile);
  profile.error_model = *model;
  profile.sigma = o.sigma;
  profile.parse_discipline = o.discipline;
  profile.validate();

  RewardConfig cfg = reward_from_flags(o.reward, o.delta, o.alpha);

  std::vector<Event> events;
  if (!o.events.empty()) {
    events = load_events(o.events);
  } else {
    events = generate_synthetic(o.synthetic_n, o.seed);
  }

  auto summaries = simulate_training_signal(events, profile, cfg, o.steps, o.seed, o.g);
  if (o.out.empty()) {
    write_summary_csv(std::cout, summaries);
  } else {
    auto out = open_output(o.out);
    write_summary_csv(out, summaries);
    const auto& last = summaries.back();
    std::cout << "simulate: steps=" << summaries.size() << " mean_reward="
              << fmt_trim(last.mean_reward) << " kept_rate=" << fmt_trim(last.kept_rate)
              << " coverage=" << fmt_trim(last.coverage) << "\n";
  }
  return 0;
}

int run_serve(const ServeOpts& o) {
  ServiceConfig cfg;
  cfg.port = o.port;
  cfg.max_body_bytes = o.max_body_bytes;
  cfg.default_delta = o.default_delta;
  cfg.default_alpha = o.default_alpha;
  std::cout << "serve: port=" << cfg.port << " digest=" << service_config_digest(cfg) << "\n";
  RewardService service(cfg);
  if (!service.run()) {
    throw std::runtime_error("failed to bind port " + std::to_string(cfg.port));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alertcast: transit incident duration toolkit (verifier rewards, "
               "group-relative advantages, tolerance metrics, baselines)"};
  app.require_subcommand(1);
  std::string config_path;
  constexpr const char* kConfigHelp =
      "key=value config file with '#' comments; command-line flags take precedence";

  IngestOpts ingest_o;
  auto* ingest = app.add_subcommand("ingest", "Link alerts into events and finalize boundaries");
  ingest->add_option("--in", ingest_o.in, "input alerts JSONL")->required();
  ingest->add_option("--out", ingest_o.out, "output events JSONL")->required();
  ingest->add_option("--config", config_path, kConfigHelp);

  GenerateOpts gen_o;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic event dataset");
  generate->add_option("--n", gen_o.n, "number of events")->default_val(1000);
  generate->add_option("--seed", gen_o.seed, "random seed")->default_val(0);
  generate->add_option("--out", gen_o.out, "output events JSONL")->required();
  generate->add_option("--config", config_path, kConfigHelp);

  StatsOpts stats_o;
  auto* stats = app.add_subcommand("stats", "Per-category duration summary table");
  stats->add_option("--events", stats_o.events, "events JSONL")->required();
  stats->add_option("--split", stats_o.split, "split JSON; restricts to the training fold");
  stats->add_option("--out", stats_o.out, "output stats CSV")->required();
  stats->add_option("--config", config_path, kConfigHelp);

  SplitOpts split_o;
  auto* split = app.add_subcommand("split", "Deterministic train/test split");
  split->add_option("--events", split_o.events, "events JSONL")->required();
  split->add_option("--seed", split_o.seed, "shuffle seed")->default_val(0);
  split->add_option("--fraction", split_o.fraction, "training fraction in (0,1)")
      ->default_val(0.8);
  split->add_option("--out", split_o.out, "output split JSON")->required();
  split->add_option("--config", config_path, kConfigHelp);

  PromptOpts prompt_o;
  auto* prompts = app.add_subcommand("render-prompts", "Render p1/p2/p3 prompts per event");
  prompts->add_option("--events", prompt_o.events, "events JSONL")->required();
  prompts->add_option("--variant", prompt_o.variant, "prompt variant: p1, p2 or p3")
      ->default_val("p1");
  prompts->add_option("--stats", prompt_o.stats, "stats CSV (required for p3)");
  prompts->add_option("--max-chars", prompt_o.max_chars, "prompt character budget")
      ->default_val(8192);
  prompts->add_option("--out", prompt_o.out, "output prompts JSONL")->required();
  prompts->add_option("--config", config_path, kConfigHelp);

  ScoreOpts score_o;
  auto* score = app.add_subcommand("score", "Parse and score responses against ground truth");
  score->add_option("--in", score_o.in, "input JSONL {truth_minutes, response_text}")
      ->required();
  score->add_option("--out", score_o.out, "output outcomes JSONL")->required();
  score->add_option("--reward", score_o.reward, "reward kind: r0, r1 or r2")->default_val("r2");
  score->add_option("--delta", score_o.delta, "tolerance band, minutes")->default_val(10.0);
  score->add_option("--alpha", score_o.alpha, "shaped-reward steepness")->default_val(2.0);
  score->add_option("--parse-fail-error", score_o.parse_fail_error,
                    "r0 error charged on parse failure, minutes (default: delta)");
  score->add_flag("--lenient", score_o.lenient,
                  "fall back to the last standalone number when no box parses");
  score->add_option("--expected-len", score_o.expected_len,
                    "overlong penalty start, tokens");
  score->add_option("--buffer-len", score_o.buffer_len,
                    "overlong penalty ramp length, tokens (enables the penalty)");
  score->add_option("--config", config_path, kConfigHelp);

  AdvOpts adv_o;
  auto* advantages =
      app.add_subcommand("advantages", "Group advantages, surrogates and the sampling filter");
  advantages->add_option("--in", adv_o.in, "input groups JSONL")->required();
  advantages->add_option("--out", adv_o.out, "output JSONL")->required();
  advantages->add_option("--reward", adv_o.reward, "reward kind: r0, r1 or r2")
      ->default_val("r2");
  advantages->add_option("--delta", adv_o.delta, "tolerance band, minutes")->default_val(10.0);
  advantages->add_option("--alpha", adv_o.alpha, "shaped-reward steepness")->default_val(2.0);
  advantages->add_option("--eps-norm", adv_o.eps_norm, "advantage normalization epsilon")
      ->default_val(1e-6);
  advantages->add_option("--eps", adv_o.eps, "symmetric clip bound (grpo)")->default_val(0.2);
  advantages->add_option("--eps-low", adv_o.eps_low, "lower clip bound (dapo)")
      ->default_val(0.2);
  advantages->add_option("--eps-high", adv_o.eps_high, "upper clip bound (dapo)")
      ->default_val(0.28);
  advantages->add_option("--dual-clip-c", adv_o.dual_clip_c, "dual-clip floor constant (dapo)")
      ->default_val(10.0);
  advantages->add_option("--config", config_path, kConfigHelp);

  BaselineOpts base_o;
  auto* baseline = app.add_subcommand("baseline", "Fit a classical predictor and emit predictions");
  baseline->add_option("--kind", base_o.kind,
                       "predictor: global-mean, category-mean, knn or ridge")
      ->default_val("global-mean");
  baseline->add_option("--events", base_o.events, "events JSONL")->required();
  baseline->add_option("--split", base_o.split, "split JSON")->required();
  baseline->add_option("--out", base_o.out, "output predictions JSONL")->required();
  baseline->add_option("--d", base_o.d, "hashing buckets")->default_val(256);
  baseline->add_option("--k", base_o.k, "knn neighbors")->default_val(5);
  baseline->add_option("--lambda", base_o.lambda, "ridge regularization")->default_val(1.0);
  baseline->add_option("--features", base_o.features, "feature kind: hash or m1")
      ->default_val("hash");
  baseline->add_option("--threads", base_o.threads, "prediction threads");
  baseline->add_option("--config", config_path, kConfigHelp);

  EvalOpts eval_o;
  auto* eval = app.add_subcommand("eval", "Tolerance sweep over a prediction file");
  eval->add_option("--pred", eval_o.pred, "predictions JSONL")->required();
  eval->add_option("--truth", eval_o.truth, "events JSONL for event_id joins");
  eval->add_option("--grid", eval_o.grid, "comma-separated bands, minutes")
      ->default_val("5,10,30,60,120");
  eval->add_option("--out", eval_o.out, "output CSV")->required();
  eval->add_option("--config", config_path, kConfigHelp);

  SweepOpts sweep_o;
  auto* sweep = app.add_subcommand("sweep", "Aggregate several prediction files into one CSV");
  sweep->add_option("--pred", sweep_o.preds, "predictions JSONL (repeatable)")->required();
  sweep->add_option("--truth", sweep_o.truth, "events JSONL")->required();
  sweep->add_option("--grid", sweep_o.grid, "comma-separated bands, minutes")
      ->default_val("5,10,30,60,120");
  sweep->add_option("--out", sweep_o.out, "output CSV")->required();
  sweep->add_option("--config", config_path, kConfigHelp);

  SimulateOpts sim_o;
  auto* simulate = app.add_subcommand("simulate", "Synthetic-policy training-signal summaries");
  simulate->add_option("--profile", sim_o.profile, "policy: gaussian, lognormal or oracle")
      ->default_val("gaussian");
  simulate->add_option("--sigma", sim_o.sigma, "error spread: minutes (gaussian) or log-space")
      ->default_val(5.0);
  simulate->add_option("--discipline", sim_o.discipline,
                       "probability of a parseable boxed answer")
      ->default_val(1.0);
  simulate->add_option("--reward", sim_o.reward, "reward kind: r0, r1 or r2")->default_val("r2");
  simulate->add_option("--delta", sim_o.delta, "tolerance band, minutes")->default_val(10.0);
  simulate->add_option("--alpha", sim_o.alpha, "shaped-reward steepness")->default_val(2.0);
  simulate->add_option("--g", sim_o.g, "rollouts per prompt")->default_val(8);
  simulate->add_option("--steps", sim_o.steps, "simulation steps")->default_val(5);
  simulate->add_option("--seed", sim_o.seed, "random seed")->default_val(0);
  simulate->add_option("--events", sim_o.events, "events JSONL (default: synthetic)");
  simulate->add_option("--synthetic-n", sim_o.synthetic_n,
                       "synthetic dataset size when no --events")
      ->default_val(256);
  simulate->add_option("--out", sim_o.out, "summary CSV (default: stdout)");
  simulate->add_option("--config", config_path, kConfigHelp);

  ServeOpts serve_o;
  if (const char* env_port = std::getenv("REWARD_PORT")) {
    serve_o.port = std::atoi(env_port);
  }
  auto* serve = app.add_subcommand("serve", "HTTP scoring sidecar (/v1/score, /healthz)");
  serve->add_option("--port", serve_o.port, "listen port (env REWARD_PORT)")
      ->default_val(serve_o.port);
  serve->add_option("--max-body-bytes", serve_o.max_body_bytes, "request body limit, bytes")
      ->default_val(4 * 1024 * 1024);
  serve->add_option("--default-delta", serve_o.default_delta, "default tolerance, minutes")
      ->default_val(10.0);
  serve->add_option("--default-alpha", serve_o.default_alpha, "default steepness")
      ->default_val(2.0);
  serve->add_option("--config", config_path, kConfigHelp);

  try {
    auto args = expand_config_args(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11's vector overload pops from the back
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    std::cerr << "run with --help for usage\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*ingest) {
      log_resolved_config(*ingest);
      return run_ingest(ingest_o);
    }
    if (*generate) {
      log_resolved_config(*generate);
      return run_generate(gen_o);
    }
    if (*stats) {
      log_resolved_config(*stats);
      return run_stats(stats_o);
    }
    if (*split) {
      log_resolved_config(*split);
      return run_split(split_o);
    }
    if (*prompts) {
      log_resolved_config(*prompts);
      return run_prompts(prompt_o);
    }
    if (*score) {
      log_resolved_config(*score);
      return run_score(score_o);
    }
    if (*advantages) {
      log_resolved_config(*advantages);
      return run_advantages(adv_o);
    }
    if (*baseline) {
      log_resolved_config(*baseline);
      return run_baseline(base_o);
    }
    if (*eval) {
      log_resolved_config(*eval);
      return run_eval(eval_o);
    }
    if (*sweep) {
      log_resolved_config(*sweep);
      return run_sweep(sweep_o);
    }
    if (*simulate) {
      log_resolved_config(*simulate);
      return run_simulate(sim_o);
    }
    if (*serve) {
      log_resolved_config(*serve);
      return run_serve(serve_o);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
