#include "alertcast/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace alertcast {

std::uint32_t fnv1a32(std::string_view bytes) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

std::vector<std::uint32_t> tokenize_ids(std::string_view text) {
  std::vector<std::uint32_t> ids;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) {
      ids.push_back(fnv1a32(token));
      token.clear();
    }
  };
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      token.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return ids;
}

Eigen::VectorXd hash_token_ids(std::span<const std::uint32_t> ids, int d) {
  if (d < 1) {
    throw std::invalid_argument("hash_token_ids: d must be >= 1");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  for (std::uint32_t id : ids) {
    v[static_cast<Eigen::Index>(id % static_cast<std::uint32_t>(d))] += 1.0;
  }
  double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

Eigen::VectorXd tokenize_and_hash(std::string_view text, int d) {
  auto ids = tokenize_ids(text);
  return hash_token_ids(ids, d);
}

std::optional<RegressorKind> parse_regressor_kind(std::string_view s) {
  if (s == "global-mean" || s == "global_mean") return RegressorKind::global_mean;
  if (s == "category-mean" || s == "category_mean") return RegressorKind::category_mean;
  if (s == "knn") return RegressorKind::knn;
  if (s == "ridge") return RegressorKind::ridge;
  return std::nullopt;
}

std::string_view regressor_kind_name(RegressorKind k) {
  switch (k) {
    case RegressorKind::global_mean: return "global-mean";
    case RegressorKind::category_mean: return "category-mean";
    case RegressorKind::knn: return "knn";
    case RegressorKind::ridge: return "ridge";
  }
  return "global-mean";
}

void BaselineConfig::validate() const {
  if (d < 1) throw std::invalid_argument("baseline config: d must be >= 1");
  if (k < 1) throw std::invalid_argument("baseline config: k must be >= 1");
  if (lambda < 0.0) throw std::invalid_argument("baseline config: lambda must be >= 0");
}

Eigen::VectorXd event_features(const Event& event, const BaselineConfig& cfg) {
  if (cfg.features == FeatureKind::hashed_text) {
    return tokenize_and_hash(visible_text(event), cfg.d);
  }
  // m1: one-hot macro category, visible alert count, hashed first alert text
  const auto& macros = default_taxonomy().macro_labels;
  auto visible = visible_alerts(event);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(macros.size()) + 1 + cfg.d);
  for (std::size_t m = 0; m < macros.size(); ++m) {
    if (macros[m] == event.macro_category) {
      v[static_cast<Eigen::Index>(m)] = 1.0;
      break;
    }
  }
  v[static_cast<Eigen::Index>(macros.size())] = static_cast<double>(visible.size());
  v.tail(cfg.d) = tokenize_and_hash(visible.empty() ? "" : visible.front()->text, cfg.d);
  return v;
}

namespace {

void fit_ridge(RegressorModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               double lambda) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();

  // augmented normal equations with an unregularized bias column
  Eigen::MatrixXd a(d + 1, d + 1);
  a.topLeftCorner(d, d) = x.transpose() * x;
  a.topLeftCorner(d, d) += lambda * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd col_sums = x.colwise().sum();
  a.topRightCorner(d, 1) = col_sums;
  a.bottomLeftCorner(1, d) = col_sums.transpose();
  a(d, d) = static_cast<double>(n);

  Eigen::VectorXd b(d + 1);
  b.head(d) = x.transpose() * y;
  b[d] = y.sum();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) {
    throw std::invalid_argument(
        "ridge fit: normal equations are singular; use lambda > 0");
  }
  Eigen::VectorXd coef = lu.solve(b);
  model.ridge_weights = coef.head(d);
  model.ridge_bias = coef[d];
}

}  // namespace

RegressorModel fit_features(const BaselineConfig& cfg, const Eigen::MatrixXd& features,
                            const Eigen::VectorXd& targets) {
  cfg.validate();
  if (features.rows() == 0 || features.rows() != targets.size()) {
    throw std::invalid_argument("fit: empty or mismatched training matrix");
  }
  RegressorModel model;
  model.cfg = cfg;
  model.global_mean = targets.mean();
  switch (cfg.kind) {
    case RegressorKind::global_mean:
    case RegressorKind::category_mean:
      throw std::invalid_argument("fit_features: feature-space fit is for knn/ridge");
    case RegressorKind::knn:
      if (cfg.k > features.rows()) {
        throw std::invalid_argument("knn fit: k exceeds the training size");
      }
      model.train_features = features;
      model.train_targets = targets;
      break;
    case RegressorKind::ridge:
      fit_ridge(model, features, targets, cfg.lambda);
      break;
  }
  return model;
}

RegressorModel fit(const BaselineConfig& cfg, std::span<const Event> train) {
  cfg.validate();
  if (train.empty()) {
    throw std::invalid_argument("fit: empty training set");
  }

  if (cfg.kind == RegressorKind::global_mean || cfg.kind == RegressorKind::category_mean) {
    RegressorModel model;
    model.cfg = cfg;
    double sum = 0.0;
    for (const auto& e : train) sum += e.duration_minutes;
    model.global_mean = sum / static_cast<double>(train.size());
    if (cfg.kind == RegressorKind::category_mean) {
      std::map<std::string, std::pair<double, std::size_t>> acc;
      for (const auto& e : train) {
        auto& [s, c] = acc[e.macro_category];
        s += e.duration_minutes;
        ++c;
      }
      for (const auto& [cat, sc] : acc) {
        model.category_means[cat] = sc.first / static_cast<double>(sc.second);
      }
    }
    return model;
  }

  Eigen::MatrixXd x(static_cast<Eigen::Index>(train.size()),
                    event_features(train.front(), cfg).size());
  Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
  for (std::size_t i = 0; i < train.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = event_features(train[i], cfg).transpose();
    y[static_cast<Eigen::Index>(i)] = train[i].duration_minutes;
  }
  return fit_features(cfg, x, y);
}

double predict_features(const RegressorModel& model, const Eigen::VectorXd& features) {
  double pred = 0.0;
  switch (model.cfg.kind) {
    case RegressorKind::global_mean:
    case RegressorKind::category_mean:
      pred = model.global_mean;
      break;
    case RegressorKind::knn: {
      const Eigen::Index n = model.train_features.rows();
      Eigen::VectorXd d2 =
          (model.train_features.rowwise() - features.transpose()).rowwise().squaredNorm();
      std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
      auto k = static_cast<std::size_t>(std::min<Eigen::Index>(model.cfg.k, n));
      // ties broken by lower training index
      std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1),
                       order.end(), [&](Eigen::Index a, Eigen::Index b) {
                         return std::tie(d2[a], a) < std::tie(d2[b], b);
                       });
      double sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) sum += model.train_targets[order[i]];
      pred = sum / static_cast<double>(k);
      break;
    }
    case RegressorKind::ridge:
      pred = model.ridge_weights.dot(features) + model.ridge_bias;
      break;
  }
  return std::max(pred, 0.0);
}

double predict(const RegressorModel& model, const Event& event) {
  switch (model.cfg.kind) {
    case RegressorKind::global_mean:
      return std::max(model.global_mean, 0.0);
    case RegressorKind::category_mean: {
      auto it = model.category_means.find(event.macro_category);
      double pred = it == model.category_means.end() ? model.global_mean : it->second;
      return std::max(pred, 0.0);
    }
    case RegressorKind::knn:
    case RegressorKind::ridge:
      return predict_features(model, event_features(event, model.cfg));
  }
  return std::max(model.global_mean, 0.0);
}

}  // namespace alertcast
