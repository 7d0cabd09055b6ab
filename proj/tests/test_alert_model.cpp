#include <stdexcept>
#include <unordered_set>

#include "alertcast/alert_model.hpp"
#include "doctest.h"

using namespace alertcast;

TEST_CASE("taxonomy has 26 fine labels mapping onto exactly 8 macro labels") {
  const auto& t = default_taxonomy();
  CHECK(t.fine_labels.size() == 26);
  CHECK(t.macro_labels.size() == 8);
  CHECK(t.fine_to_macro.size() == 26);

  std::unordered_set<std::string> image;
  for (const auto& fine : t.fine_labels) {
    image.insert(map_fine_to_macro(fine));
  }
  CHECK(image.size() == 8);
  for (const auto& macro : t.macro_labels) {
    CHECK(image.count(macro) == 1);
  }
}

TEST_CASE("macro label set is exact") {
  const auto& m = default_taxonomy().macro_labels;
  std::vector<std::string> expected = {"train mechanical",     "passenger incident",
                                       "external factors",     "operational",
                                       "signal control",       "track infrastructure",
                                       "station related",      "other"};
  for (const auto& label : expected) {
    CHECK(std::count(m.begin(), m.end(), label) == 1);
  }
}

TEST_CASE("fine to macro merge rows") {
  CHECK(map_fine_to_macro("signal problem") == "signal control");
  CHECK(map_fine_to_macro("switch problem") == "signal control");
  CHECK(map_fine_to_macro("medical assistance") == "passenger incident");
  CHECK(map_fine_to_macro("other") == "other");
  CHECK(map_fine_to_macro("mechanical problem") == "train mechanical");
  CHECK(map_fine_to_macro("brakes activated") == "train mechanical");
  CHECK(map_fine_to_macro("delays") == "external factors");
  CHECK(map_fine_to_macro("debris on tracks") == "external factors");
  CHECK(map_fine_to_macro("residual delays") == "operational");
  CHECK(map_fine_to_macro("ferry service issue") == "operational");
  CHECK(map_fine_to_macro("track condition") == "track infrastructure");
  CHECK(map_fine_to_macro("power issue") == "track infrastructure");
  CHECK(map_fine_to_macro("cleaning train") == "station related");
  CHECK(map_fine_to_macro("unauthorized person on tracks") == "passenger incident");
}

TEST_CASE("unknown fine label is rejected and named") {
  CHECK_THROWS_WITH_AS(map_fine_to_macro("gremlins"),
                       doctest::Contains("gremlins"), std::invalid_argument);
}

TEST_CASE("make_event sorts, deduplicates and derives boundaries") {
  std::vector<Alert> alerts = {
      {"e1", 600, "delays cleared", std::nullopt},
      {"e1", 0, "trains are delayed", std::nullopt},
      {"e1", 600, "delays cleared", std::nullopt},  // exact duplicate
  };
  Event e = make_event("e1", alerts, "delays");
  CHECK(e.alerts.size() == 2);
  CHECK(e.start == 0);
  CHECK(e.end == 600);
  CHECK(e.duration_minutes == doctest::Approx(10.0));
  CHECK(e.macro_category == "external factors");
  CHECK(e.alerts.front().timestamp == 0);
}

TEST_CASE("make_event rejects invariant violations") {
  CHECK_THROWS_AS(make_event("e", {}, "delays"), std::invalid_argument);
  CHECK_THROWS_AS(make_event("e", {{"e", -1, "text", std::nullopt}}, "delays"),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_event("e", {{"e", 0, "   ", std::nullopt}}, "delays"),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_event("e", {{"e", 0, "text", std::nullopt}}, "not a label"),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      make_event("e", {{"e", 100, "text", std::nullopt}}, "delays", std::int64_t{99}),
      std::invalid_argument);
}

TEST_CASE("duration round-trips from the stored timestamps") {
  // awkward second counts whose minute value is not exact in binary
  for (std::int64_t span : {0, 1, 59, 61, 100, 3600, 86399}) {
    Event e = make_event(
        "e", {{"e", 10, "start of delays", std::nullopt},
              {"e", 10 + span, "delays cleared", std::nullopt}},
        "delays");
    CHECK(recompute_duration_minutes(e) == e.duration_minutes);
  }
}

TEST_CASE("visible alerts default to everything before the terminal alert") {
  Event e = make_event("e",
                       {{"e", 0, "first", std::nullopt},
                        {"e", 60, "second", std::nullopt},
                        {"e", 120, "delays cleared", std::nullopt}},
                       "delays");
  auto v = visible_alerts(e);
  REQUIRE(v.size() == 2);
  CHECK(v[0]->text == "first");
  CHECK(v[1]->text == "second");
  CHECK(visible_text(e) == "first second");

  Event single = make_event("s", {{"s", 0, "delays cleared", std::nullopt}}, "delays");
  CHECK(visible_alerts(single).size() == 1);
}

TEST_CASE("forecast_cut bounds the visible alerts") {
  Event e = make_event("e",
                       {{"e", 0, "first", std::nullopt},
                        {"e", 60, "second", std::nullopt},
                        {"e", 120, "delays cleared", std::nullopt}},
                       "delays", std::int64_t{60});
  auto v = visible_alerts(e);
  REQUIRE(v.size() == 2);
  CHECK(v[1]->timestamp == 60);
}
