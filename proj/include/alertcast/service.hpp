#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include "nlohmann/json.hpp"

namespace alertcast {

struct ServiceConfig {
  int port = 8787;
  std::size_t max_body_bytes = 4 * 1024 * 1024;
  double default_delta = 10.0;
  double default_alpha = 2.0;
};

// Digest of the effective configuration, reported by /healthz.
std::string service_config_digest(const ServiceConfig& cfg);

std::string service_version();

// 400: request body is structurally wrong
struct BadRequestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// 422: request parses but the reward configuration is invalid
struct InvalidConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pure scoring path shared by the HTTP handler and direct library callers;
// service responses are byte-identical to this function's output. Numbers
// are rounded to 9 significant digits; null encodes a parse failure.
nlohmann::json score_request_json(const nlohmann::json& request, const ServiceConfig& cfg);

nlohmann::json health_json(const ServiceConfig& cfg);

// Blocking HTTP server exposing POST /v1/score and GET /healthz.
class RewardService {
 public:
  explicit RewardService(ServiceConfig cfg);
  ~RewardService();

  // Binds and serves until stop(); returns false if the port is taken.
  bool run();
  // Binds to an ephemeral port and serves on a background thread; returns
  // the bound port. Used by tests.
  int start_async();
  void stop();

  const ServiceConfig& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace alertcast
