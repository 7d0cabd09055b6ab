#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alertcast/alert_model.hpp"

namespace alertcast {

// One line of the alert input file. fine_category is an optional annotation
// column; when absent the category is inferred from the alert texts.
struct RawAlertRecord {
  std::string event_key;
  std::int64_t timestamp = 0;
  std::string text;
  std::optional<TransitMode> mode;
  std::optional<std::string> fine_category;
};

struct ParseTally {
  std::size_t lines = 0;
  std::size_t malformed = 0;
};

// Returns nullopt on a malformed line; the reason lands in *error if given.
std::optional<RawAlertRecord> parse_alert_line(std::string_view line,
                                               std::string* error = nullptr);

std::vector<RawAlertRecord> read_alerts_jsonl(std::istream& in, ParseTally& tally);

// Ordered lowercase substring patterns marking a conclusive alert.
struct TerminalPhraseRules {
  std::vector<std::string> patterns;

  static TerminalPhraseRules defaults();
  bool matches(std::string_view text) const;  // case-insensitive substring
  void validate() const;
};

// Groups records by event_key, sorts and deduplicates alerts, derives
// boundaries and durations. Categories come from the first annotated record
// of the event, else from keyword inference over the alert texts.
std::vector<Event> link_events(std::span<const RawAlertRecord> records);

struct FinalizeResult {
  std::vector<Event> kept;
  std::size_t excluded = 0;
};

// Keeps only events whose last alert matches a terminal pattern and which
// pass the consistency checks (non-negative duration, monotone timestamps,
// no duplicate alerts); everything else is tallied in excluded.
FinalizeResult finalize_boundaries(std::vector<Event> events,
                                   const TerminalPhraseRules& rules);

// Longest fine label occurring as a case-insensitive substring of the alert
// texts, scanning alerts in time order; "other" when nothing matches.
std::string infer_fine_category(std::span<const Alert> alerts);

// Quantile by linear interpolation between order statistics; values must be
// sorted ascending. quantile_linear({1,2,3,4}, 0.25) == 1.75.
double quantile_linear(std::span<const double> sorted, double p);

// Per-macro-category duration summaries (population std, linear-interpolation
// quartiles). Rows appear in taxonomy order; empty categories are omitted.
// Call on the training subset only.
StatsTable build_stats(std::span<const Event> events);

// Deterministic shuffle of the sorted event ids by seed; the first
// ceil(fraction * N) become the training fold. Requires N >= 2 and
// 0 < fraction < 1.
DatasetSplit make_split(std::span<const Event> events, std::uint64_t seed, double fraction);

// Synthetic dataset calibrated to the production category shares and
// per-category duration medians/means (log-normal per category, so
// sigma_ln = sqrt(2 ln(mean/median))). Each event carries an initial
// "delayed" alert naming the incident type and a coarse severity word, and a
// terminal "delays cleared" alert spaced by the sampled duration.
std::vector<Event> generate_synthetic(std::size_t n, std::uint64_t seed);

// Reference rows behind the synthetic generator; exposed for calibration
// checks and the category-share tables.
struct SyntheticCategoryRow {
  std::string macro;
  std::size_t count;   // production tally, defines the share
  double mean;         // minutes
  double median;       // minutes
};
std::span<const SyntheticCategoryRow> synthetic_category_rows();

// --- file formats ---------------------------------------------------------

void write_events_jsonl(std::ostream& out, std::span<const Event> events);
std::vector<Event> read_events_jsonl(std::istream& in, ParseTally& tally);

// Flattened alert stream (one RawAlertRecord per line, annotated with the
// event's fine category) suitable for re-ingestion.
void write_alerts_jsonl(std::ostream& out, std::span<const Event> events);

void write_stats_csv(std::ostream& out, const StatsTable& table);
StatsTable read_stats_csv(std::istream& in);
std::string stats_csv_string(const StatsTable& table);

void write_split_json(std::ostream& out, const DatasetSplit& split);
DatasetSplit read_split_json(std::istream& in);

}  // namespace alertcast
