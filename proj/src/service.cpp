#include "alertcast/service.hpp"

#include <thread>

#include "alertcast/baselines.hpp"
#include "alertcast/format.hpp"
#include "alertcast/grpo.hpp"
#include "alertcast/verifier.hpp"
#include "httplib.h"

namespace alertcast {

using nlohmann::json;

std::string service_version() { return "0.1.0"; }

std::string service_config_digest(const ServiceConfig& cfg) {
  std::string canonical = "port=" + std::to_string(cfg.port) +
                          ";max_body_bytes=" + std::to_string(cfg.max_body_bytes) +
                          ";default_delta=" + fmt_trim(cfg.default_delta, 9) +
                          ";default_alpha=" + fmt_trim(cfg.default_alpha, 9);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", fnv1a32(canonical));
  return buf;
}

namespace {

double require_number(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_number()) {
    throw BadRequestError(std::string("missing numeric field ") + field);
  }
  return j[field].get<double>();
}

RewardConfig parse_reward_config(const json& j, const ServiceConfig& defaults) {
  RewardConfig cfg;
  cfg.delta = defaults.default_delta;
  cfg.alpha = defaults.default_alpha;
  if (!j.is_object()) throw BadRequestError("reward must be an object");
  if (j.contains("kind")) {
    if (!j["kind"].is_string()) throw BadRequestError("reward.kind must be a string");
    auto kind = parse_reward_kind(j["kind"].get<std::string>());
    if (!kind) throw InvalidConfigError("unknown reward kind: " + j["kind"].get<std::string>());
    cfg.kind = *kind;
  }
  if (j.contains("delta")) {
    if (!j["delta"].is_number()) throw BadRequestError("reward.delta must be a number");
    cfg.delta = j["delta"].get<double>();
  }
  if (j.contains("alpha")) {
    if (!j["alpha"].is_number()) throw BadRequestError("reward.alpha must be a number");
    cfg.alpha = j["alpha"].get<double>();
  }
  if (j.contains("parse_fail_error")) {
    if (!j["parse_fail_error"].is_number()) {
      throw BadRequestError("reward.parse_fail_error must be a number");
    }
    cfg.parse_fail_error = j["parse_fail_error"].get<double>();
  }
  if (j.contains("overlong") && !j["overlong"].is_null()) {
    const auto& o = j["overlong"];
    if (!o.is_object()) throw BadRequestError("reward.overlong must be an object");
    OverlongConfig oc;
    if (o.contains("expected_len")) {
      if (!o["expected_len"].is_number_integer()) {
        throw BadRequestError("overlong.expected_len must be an integer");
      }
      oc.expected_len = o["expected_len"].get<std::int64_t>();
    }
    if (o.contains("buffer_len")) {
      if (!o["buffer_len"].is_number_integer()) {
        throw BadRequestError("overlong.buffer_len must be an integer");
      }
      oc.buffer_len = o["buffer_len"].get<std::int64_t>();
    }
    cfg.overlong = oc;
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw InvalidConfigError(e.what());
  }
  return cfg;
}

}  // namespace

json score_request_json(const json& request, const ServiceConfig& defaults) {
  if (!request.is_object()) throw BadRequestError("body must be a JSON object");

  double truth = require_number(request, "truth_minutes");
  if (truth < 0.0) throw BadRequestError("truth_minutes must be >= 0");

  if (!request.contains("responses") || !request["responses"].is_array() ||
      request["responses"].empty()) {
    throw BadRequestError("responses must be a non-empty array of strings");
  }
  for (const auto& r : request["responses"]) {
    if (!r.is_string()) throw BadRequestError("responses must be a non-empty array of strings");
  }

  RewardConfig cfg = request.contains("reward")
                         ? parse_reward_config(request["reward"], defaults)
                         : parse_reward_config(json::object(), defaults);

  std::vector<std::optional<std::int64_t>> lengths(request["responses"].size(), std::nullopt);
  if (request.contains("lengths") && !request["lengths"].is_null()) {
    const auto& lens = request["lengths"];
    if (!lens.is_array() || lens.size() != request["responses"].size()) {
      throw BadRequestError("lengths must parallel responses");
    }
    for (std::size_t i = 0; i < lens.size(); ++i) {
      if (!lens[i].is_number_integer()) throw BadRequestError("lengths must be integers");
      lengths[i] = lens[i].get<std::int64_t>();
    }
  }

  bool want_advantages = false;
  if (request.contains("want_advantages")) {
    if (!request["want_advantages"].is_boolean()) {
      throw BadRequestError("want_advantages must be a boolean");
    }
    want_advantages = request["want_advantages"].get<bool>();
  }
  double eps_norm = 1e-6;
  if (request.contains("eps_norm") && !request["eps_norm"].is_null()) {
    if (!request["eps_norm"].is_number()) throw BadRequestError("eps_norm must be a number");
    eps_norm = request["eps_norm"].get<double>();
    if (eps_norm < 0.0) throw InvalidConfigError("eps_norm must be >= 0");
  }

  std::vector<RewardOutcome> outcomes;
  outcomes.reserve(request["responses"].size());
  for (std::size_t i = 0; i < request["responses"].size(); ++i) {
    outcomes.push_back(score_text(request["responses"][i].get<std::string>(), truth, cfg,
                                  ParseMode::strict, lengths[i]));
  }

  json out;
  json parsed = json::array();
  json rewards = json::array();
  for (const auto& o : outcomes) {
    if (o.parsed.ok()) {
      parsed.push_back(round_sig(*o.parsed.value));
    } else {
      parsed.push_back(nullptr);
    }
    rewards.push_back(round_sig(o.reward));
  }
  out["parsed"] = std::move(parsed);
  out["rewards"] = std::move(rewards);
  out["coverage"] = round_sig(coverage(outcomes));
  if (want_advantages && outcomes.size() >= 2) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(outcomes.size()));
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      r[i] = outcomes[static_cast<std::size_t>(i)].reward;
    }
    AdvantageSet adv = group_advantages(r, eps_norm);
    json advantages = json::array();
    for (Eigen::Index i = 0; i < adv.advantages.size(); ++i) {
      advantages.push_back(round_sig(adv.advantages[i]));
    }
    out["advantages"] = std::move(advantages);
  }
  return out;
}

json health_json(const ServiceConfig& cfg) {
  json j;
  j["status"] = "ok";
  j["version"] = service_version();
  j["config_digest"] = service_config_digest(cfg);
  return j;
}

struct RewardService::Impl {
  ServiceConfig cfg;
  httplib::Server server;
  std::thread worker;

  explicit Impl(ServiceConfig c) : cfg(c) {
    server.set_payload_max_length(cfg.max_body_bytes);
    server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(health_json(cfg).dump(), "application/json");
    });
    server.Post("/v1/score", [this](const httplib::Request& req, httplib::Response& res) {
      json body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
      try {
        if (body.is_discarded()) throw BadRequestError("body is not valid JSON");
        res.set_content(score_request_json(body, cfg).dump(), "application/json");
      } catch (const BadRequestError& e) {
        res.status = 400;
        res.set_content(json{{"error", "bad_request"}, {"detail", e.what()}}.dump(),
                        "application/json");
      } catch (const InvalidConfigError& e) {
        res.status = 422;
        res.set_content(json{{"error", "invalid_reward_config"}, {"detail", e.what()}}.dump(),
                        "application/json");
      }
    });
  }
};

RewardService::RewardService(ServiceConfig cfg) : impl_(std::make_unique<Impl>(cfg)) {}

RewardService::~RewardService() { stop(); }

bool RewardService::run() { return impl_->server.listen("0.0.0.0", impl_->cfg.port); }

int RewardService::start_async() {
  int port = impl_->server.bind_to_any_port("127.0.0.1");
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void RewardService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
  if (impl_ && impl_->worker.joinable()) impl_->worker.join();
}

const ServiceConfig& RewardService::config() const { return impl_->cfg; }

}  // namespace alertcast
