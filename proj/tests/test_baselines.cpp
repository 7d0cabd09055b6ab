#include <cmath>
#include <set>
#include <stdexcept>

#include "alertcast/baselines.hpp"
#include "alertcast/ingestion.hpp"
#include "doctest.h"

using namespace alertcast;

TEST_CASE("tokenizer lowercases and splits on non-alphanumerics") {
  auto a = tokenize_ids("Hello, WORLD hello");
  auto b = tokenize_ids("hello world hello");
  CHECK(a == b);
  REQUIRE(a.size() == 3);
  CHECK(a[0] == a[2]);
  CHECK(a[0] != a[1]);
  CHECK(tokenize_ids("").empty());
  CHECK(tokenize_ids("  .,;  ").empty());
}

TEST_CASE("ids hashing buckets by modulo and l2-normalizes") {
  // 3, 35 and 67 all land in bucket 3 mod 32
  std::vector<std::uint32_t> ids = {3, 35, 67};
  auto v = hash_token_ids(ids, 32);
  CHECK(v[3] == doctest::Approx(1.0));
  for (int i = 0; i < 32; ++i) {
    if (i != 3) CHECK(v[i] == 0.0);
  }

  auto one = tokenize_and_hash("delay", 64);
  CHECK(one.norm() == doctest::Approx(1.0));
  CHECK((one.array() == 1.0).count() == 1);  // one-hot

  auto empty = tokenize_and_hash("", 64);
  CHECK(empty.norm() == 0.0);

  CHECK(tokenize_and_hash("signal problem at canal st", 128) ==
        tokenize_and_hash("signal problem at canal st", 128));
  CHECK_THROWS_AS(hash_token_ids(ids, 0), std::invalid_argument);
}

TEST_CASE("normalized vectors have unit or zero norm") {
  for (const char* text : {"a", "a b c", "delays delays delays", "", "one two three four"}) {
    auto v = tokenize_and_hash(text, 32);
    double n = v.norm();
    CHECK((n == 0.0 || std::abs(n - 1.0) < 1e-9));
  }
}

TEST_CASE("coarser hashes never have fewer collisions") {
  auto events = generate_synthetic(500, 5);
  std::set<std::uint32_t> vocabulary;
  for (const auto& e : events) {
    for (auto id : tokenize_ids(visible_text(e))) vocabulary.insert(id);
  }
  REQUIRE(vocabulary.size() > 50);

  std::size_t previous = vocabulary.size() + 1;
  for (int d : {32, 64, 128, 256, 512}) {
    std::vector<std::size_t> occupancy(static_cast<std::size_t>(d), 0);
    for (auto id : vocabulary) ++occupancy[id % static_cast<std::uint32_t>(d)];
    std::size_t collisions = 0;
    for (auto c : occupancy) {
      if (c > 1) collisions += c - 1;
    }
    CHECK(collisions <= previous);
    previous = collisions;
  }
}

namespace {

Event duration_event(const std::string& id, double minutes, const std::string& fine,
                     const std::string& text) {
  auto seconds = static_cast<std::int64_t>(std::llround(minutes * 60.0));
  std::vector<Alert> alerts = {{id, 0, text, std::nullopt},
                               {id, std::max<std::int64_t>(seconds, 1), "delays cleared",
                                std::nullopt}};
  return make_event(id, std::move(alerts), fine);
}

}  // namespace

TEST_CASE("global and category means fit training durations") {
  std::vector<Event> train = {
      duration_event("a", 10.0, "signal problem", "signal problem at A"),
      duration_event("b", 20.0, "signal problem", "signal problem at B"),
      duration_event("c", 60.0, "medical assistance", "medical assistance at C"),
  };

  BaselineConfig global{RegressorKind::global_mean};
  auto g = fit(global, train);
  CHECK(predict(g, train[0]) == doctest::Approx(30.0));

  BaselineConfig category{RegressorKind::category_mean};
  auto c = fit(category, train);
  CHECK(predict(c, train[0]) == doctest::Approx(15.0));
  CHECK(predict(c, train[2]) == doctest::Approx(60.0));

  // unseen category falls back to the global mean
  Event unseen = duration_event("d", 5.0, "power issue", "power issue at D");
  CHECK(predict(c, unseen) == doctest::Approx(30.0));

  CHECK_THROWS_AS(fit(global, {}), std::invalid_argument);
}

TEST_CASE("ridge solves the regularized normal equations exactly") {
  Eigen::MatrixXd x(10, 1);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = i;
    y[i] = 2.0 * i + 1.0;
  }
  BaselineConfig cfg{RegressorKind::ridge};
  cfg.lambda = 0.0;
  auto model = fit_features(cfg, x, y);
  CHECK(model.ridge_weights[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(model.ridge_bias == doctest::Approx(1.0).epsilon(1e-8));
  Eigen::VectorXd q(1);
  q << 5.5;
  CHECK(predict_features(model, q) == doctest::Approx(12.0).epsilon(1e-8));
}

TEST_CASE("singular ridge systems at lambda zero are refused") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(6, 2);  // rank-deficient with the bias column
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(6, 0.0, 5.0);
  BaselineConfig cfg{RegressorKind::ridge};
  cfg.lambda = 0.0;
  CHECK_THROWS_WITH_AS(static_cast<void>(fit_features(cfg, x, y)),
                       doctest::Contains("lambda"), std::invalid_argument);
  cfg.lambda = 1.0;
  CHECK_NOTHROW(static_cast<void>(fit_features(cfg, x, y)));
}

TEST_CASE("ridge predictions are clamped at zero") {
  Eigen::MatrixXd x(4, 1);
  x << 0, 1, 2, 3;
  Eigen::VectorXd y(4);
  y << 30, 20, 10, 0;  // negative beyond x = 3
  BaselineConfig cfg{RegressorKind::ridge};
  cfg.lambda = 1e-9;
  auto model = fit_features(cfg, x, y);
  Eigen::VectorXd q(1);
  q << 10.0;
  CHECK(predict_features(model, q) == 0.0);
}

TEST_CASE("knn averages the nearest targets with index tie-breaks") {
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1.0;
  Eigen::VectorXd y(2);
  y << 10.0, 20.0;

  BaselineConfig cfg{RegressorKind::knn};
  cfg.k = 1;
  auto nn1 = fit_features(cfg, x, y);
  Eigen::VectorXd q(1);
  q << 0.1;
  CHECK(predict_features(nn1, q) == doctest::Approx(10.0));

  cfg.k = 2;
  auto nn2 = fit_features(cfg, x, y);
  CHECK(predict_features(nn2, q) == doctest::Approx(15.0));

  // identical points: the lower training index wins
  Eigen::MatrixXd same = Eigen::MatrixXd::Zero(3, 1);
  Eigen::VectorXd targets(3);
  targets << 7.0, 8.0, 9.0;
  cfg.k = 1;
  auto tie = fit_features(cfg, same, targets);
  Eigen::VectorXd origin = Eigen::VectorXd::Zero(1);
  CHECK(predict_features(tie, origin) == doctest::Approx(7.0));

  cfg.k = 5;
  CHECK_THROWS_AS(static_cast<void>(fit_features(cfg, x, y)), std::invalid_argument);
}

TEST_CASE("knn with k equal to the training size predicts the global mean") {
  auto events = generate_synthetic(40, 2);
  BaselineConfig cfg{RegressorKind::knn};
  cfg.k = 40;
  cfg.d = 64;
  auto model = fit(cfg, events);

  double mean = 0.0;
  for (const auto& e : events) mean += e.duration_minutes;
  mean /= static_cast<double>(events.size());

  auto probes = generate_synthetic(5, 77);
  for (const auto& p : probes) {
    CHECK(predict(model, p) == doctest::Approx(mean).epsilon(1e-9));
  }
}

TEST_CASE("fit and predict are reproducible") {
  auto events = generate_synthetic(60, 13);
  BaselineConfig cfg{RegressorKind::knn};
  cfg.k = 5;
  cfg.d = 128;
  auto m1 = fit(cfg, events);
  auto m2 = fit(cfg, events);
  auto probes = generate_synthetic(10, 99);
  for (const auto& p : probes) {
    CHECK(predict(m1, p) == predict(m2, p));  // bitwise
  }
}

TEST_CASE("m1 features concatenate category, alert count and first-alert hash") {
  BaselineConfig cfg{RegressorKind::knn};
  cfg.features = FeatureKind::m1;
  cfg.d = 32;
  Event e = duration_event("x", 25.0, "signal problem", "signal problem at Canal St");
  auto v = event_features(e, cfg);
  CHECK(v.size() == 8 + 1 + 32);
  CHECK(v.head(8).sum() == doctest::Approx(1.0));  // one-hot macro
  CHECK(v[8] == doctest::Approx(1.0));             // one visible alert
  CHECK(v.tail(32).norm() == doctest::Approx(1.0));
}
