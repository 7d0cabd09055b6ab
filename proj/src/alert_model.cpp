#include "alertcast/alert_model.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace alertcast {

std::optional<TransitMode> parse_mode(std::string_view s) {
  if (s == "subway") return TransitMode::subway;
  if (s == "bus") return TransitMode::bus;
  if (s == "other") return TransitMode::other;
  return std::nullopt;
}

std::string_view mode_name(TransitMode m) {
  switch (m) {
    case TransitMode::subway: return "subway";
    case TransitMode::bus: return "bus";
    case TransitMode::other: return "other";
  }
  return "other";
}

namespace {

CategoryTaxonomy build_taxonomy() {
  CategoryTaxonomy t;
  const std::vector<std::pair<std::string, std::vector<std::string>>> merge = {
      {"train mechanical",
       {"mechanical problem", "door problem", "brakes activated", "vandalized train"}},
      {"passenger incident",
       {"medical assistance", "disruptive person", "unauthorized person on tracks"}},
      {"external factors",
       {"delays", "police activity", "fire", "smoke condition", "debris on tracks"}},
      {"operational",
       {"train service update", "bus service update", "detour", "detour cleared",
        "residual delays", "crew shortage", "work train issue", "ferry service issue"}},
      {"signal control", {"signal problem", "switch problem"}},
      {"track infrastructure", {"track condition", "power issue"}},
      {"station related", {"cleaning train"}},
      {"other", {"other"}},
  };
  for (const auto& [macro, fines] : merge) {
    t.macro_labels.push_back(macro);
    for (const auto& fine : fines) {
      t.fine_labels.push_back(fine);
      t.fine_to_macro.emplace(fine, macro);
    }
  }
  return t;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

const CategoryTaxonomy& default_taxonomy() {
  static const CategoryTaxonomy taxonomy = build_taxonomy();
  return taxonomy;
}

const std::string& map_fine_to_macro(const std::string& fine) {
  const auto& map = default_taxonomy().fine_to_macro;
  auto it = map.find(fine);
  if (it == map.end()) {
    throw std::invalid_argument("unknown fine category: \"" + fine + "\"");
  }
  return it->second;
}

bool is_fine_label(const std::string& label) {
  return default_taxonomy().fine_to_macro.count(label) > 0;
}

const StatsRow* StatsTable::find(std::string_view category) const {
  for (const auto& row : rows) {
    if (row.category == category) return &row;
  }
  return nullptr;
}

Event make_event(std::string id, std::vector<Alert> alerts, const std::string& fine_category,
                 std::optional<std::int64_t> forecast_cut) {
  if (alerts.empty()) {
    throw std::invalid_argument("event \"" + id + "\": alert list is empty");
  }
  for (const auto& a : alerts) {
    if (a.timestamp < 0) {
      throw std::invalid_argument("event \"" + id + "\": negative alert timestamp");
    }
    if (a.text.empty() || is_blank(a.text)) {
      throw std::invalid_argument("event \"" + id + "\": blank alert text");
    }
  }

  std::sort(alerts.begin(), alerts.end(), [](const Alert& a, const Alert& b) {
    return std::tie(a.timestamp, a.text) < std::tie(b.timestamp, b.text);
  });
  alerts.erase(std::unique(alerts.begin(), alerts.end(),
                           [](const Alert& a, const Alert& b) {
                             return a.timestamp == b.timestamp && a.text == b.text;
                           }),
               alerts.end());

  Event e;
  e.id = std::move(id);
  e.start = alerts.front().timestamp;
  e.end = alerts.back().timestamp;
  e.alerts = std::move(alerts);
  e.duration_minutes = static_cast<double>(e.end - e.start) / 60.0;
  e.fine_category = fine_category;
  e.macro_category = map_fine_to_macro(fine_category);
  if (forecast_cut) {
    if (*forecast_cut < e.start || *forecast_cut > e.end) {
      throw std::invalid_argument("event \"" + e.id + "\": forecast_cut outside [start, end]");
    }
    e.forecast_cut = forecast_cut;
  }
  return e;
}

double recompute_duration_minutes(const Event& e) {
  return static_cast<double>(e.end - e.start) / 60.0;
}

std::vector<const Alert*> visible_alerts(const Event& e) {
  std::vector<const Alert*> out;
  if (e.alerts.empty()) return out;
  if (e.forecast_cut) {
    for (const auto& a : e.alerts) {
      if (a.timestamp <= *e.forecast_cut) out.push_back(&a);
    }
    if (out.empty()) out.push_back(&e.alerts.front());
    return out;
  }
  // default: everything before the terminal alert, never less than one
  std::size_t n = e.alerts.size() > 1 ? e.alerts.size() - 1 : 1;
  for (std::size_t i = 0; i < n; ++i) out.push_back(&e.alerts[i]);
  return out;
}

std::string visible_text(const Event& e) {
  std::string out;
  for (const Alert* a : visible_alerts(e)) {
    if (!out.empty()) out += ' ';
    out += a->text;
  }
  return out;
}

}  // namespace alertcast
