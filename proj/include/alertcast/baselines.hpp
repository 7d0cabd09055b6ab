#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alertcast/alert_model.hpp"

namespace alertcast {

// 32-bit FNV-1a over the token bytes; the fixed token -> ID map.
std::uint32_t fnv1a32(std::string_view bytes);

// Lowercases and splits on non-alphanumeric characters, mapping each token to
// its FNV-1a ID.
std::vector<std::uint32_t> tokenize_ids(std::string_view text);

// Bag-of-IDs: counts bucketed by ID mod d, then l2-normalized. Empty input
// yields the zero vector. d >= 1.
Eigen::VectorXd hash_token_ids(std::span<const std::uint32_t> ids, int d);

Eigen::VectorXd tokenize_and_hash(std::string_view text, int d);

enum class RegressorKind { global_mean, category_mean, knn, ridge };
enum class FeatureKind {
  hashed_text,  // hashed visible alert text
  m1,           // one-hot macro category + alert count + hashed first alert
};

std::optional<RegressorKind> parse_regressor_kind(std::string_view s);
std::string_view regressor_kind_name(RegressorKind k);

struct BaselineConfig {
  RegressorKind kind = RegressorKind::global_mean;
  FeatureKind features = FeatureKind::hashed_text;
  int d = 256;          // hashing buckets
  int k = 5;            // knn neighbors
  double lambda = 1.0;  // ridge regularization
  void validate() const;
};

Eigen::VectorXd event_features(const Event& event, const BaselineConfig& cfg);

// Immutable after fit. Predictions are clamped to >= 0; category_mean falls
// back to the global training mean for unseen categories.
struct RegressorModel {
  BaselineConfig cfg;
  double global_mean = 0.0;
  std::map<std::string, double> category_means;
  Eigen::MatrixXd train_features;  // knn: one row per training event
  Eigen::VectorXd train_targets;
  Eigen::VectorXd ridge_weights;
  double ridge_bias = 0.0;
};

// Fits on the training events only. Throws std::invalid_argument on an empty
// training set, k > training size, or a singular ridge system with lambda=0.
RegressorModel fit(const BaselineConfig& cfg, std::span<const Event> train);

double predict(const RegressorModel& model, const Event& event);

// Feature-space entry points for knn/ridge, used when features are built
// externally (e.g. pre-tokenized ID streams).
RegressorModel fit_features(const BaselineConfig& cfg, const Eigen::MatrixXd& features,
                            const Eigen::VectorXd& targets);
double predict_features(const RegressorModel& model, const Eigen::VectorXd& features);

}  // namespace alertcast
