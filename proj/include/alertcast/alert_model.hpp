#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace alertcast {

enum class TransitMode { subway, bus, other };

std::optional<TransitMode> parse_mode(std::string_view s);
std::string_view mode_name(TransitMode m);

// One timestamped alert text. Timestamps are integer seconds since epoch.
struct Alert {
  std::string event_key;
  std::int64_t timestamp = 0;
  std::string text;
  std::optional<TransitMode> mode;
};

// A linked incident: time-ordered alerts plus derived boundaries.
// duration_minutes is always (end - start) / 60; serialization rounds the
// displayed value to 3 decimals but readers recompute from the timestamps.
struct Event {
  std::string id;
  std::vector<Alert> alerts;
  std::int64_t start = 0;
  std::int64_t end = 0;
  double duration_minutes = 0.0;
  std::string fine_category;
  std::string macro_category;
  std::optional<std::int64_t> forecast_cut;
};

// Fine/macro incident taxonomy with the deterministic fine -> macro merge.
struct CategoryTaxonomy {
  std::vector<std::string> fine_labels;   // 26 entries
  std::vector<std::string> macro_labels;  // 8 entries
  std::unordered_map<std::string, std::string> fine_to_macro;
};

const CategoryTaxonomy& default_taxonomy();

// Total over the 26 fine labels; throws std::invalid_argument naming the
// offending string otherwise.
const std::string& map_fine_to_macro(const std::string& fine);

bool is_fine_label(const std::string& label);

struct StatsRow {
  std::string category;
  std::size_t count = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Per-macro-category duration summaries, computed on the training split only.
// Categories with no events have no row.
struct StatsTable {
  std::vector<StatsRow> rows;

  const StatsRow* find(std::string_view category) const;
};

struct DatasetSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;
  double fraction = 0.0;
};

// Validates invariants and normalizes the alert list: sorts by (timestamp,
// text), drops exact (timestamp, text) duplicates, derives start/end/duration.
// Throws std::invalid_argument on an empty alert list, negative timestamps,
// whitespace-only texts, an unknown fine label, or a forecast_cut outside
// [start, end].
Event make_event(std::string id, std::vector<Alert> alerts, const std::string& fine_category,
                 std::optional<std::int64_t> forecast_cut = std::nullopt);

double recompute_duration_minutes(const Event& e);

// Leakage rule shared by prompts and feature extraction: alerts visible at
// prediction time. With forecast_cut set, alerts with timestamp <= cut;
// otherwise every alert before the terminal one (never fewer than one).
std::vector<const Alert*> visible_alerts(const Event& e);

// Space-joined texts of visible_alerts, in time order.
std::string visible_text(const Event& e);

}  // namespace alertcast
