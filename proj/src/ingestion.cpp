#include "alertcast/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "alertcast/format.hpp"
#include "alertcast/rng.hpp"
#include "nlohmann/json.hpp"

namespace alertcast {

using nlohmann::json;

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::optional<RawAlertRecord> parse_alert_line(std::string_view line, std::string* error) {
  auto fail = [&](std::string why) -> std::optional<RawAlertRecord> {
    if (error) *error = std::move(why);
    return std::nullopt;
  };

  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return fail("not a JSON object");

  RawAlertRecord rec;
  if (!j.contains("event_key") || !j["event_key"].is_string()) {
    return fail("missing string field event_key");
  }
  rec.event_key = j["event_key"].get<std::string>();
  if (rec.event_key.empty()) return fail("empty event_key");

  if (!j.contains("timestamp") || !j["timestamp"].is_number_integer()) {
    return fail("missing integer field timestamp");
  }
  rec.timestamp = j["timestamp"].get<std::int64_t>();
  if (rec.timestamp < 0) return fail("negative timestamp");

  if (!j.contains("text") || !j["text"].is_string()) {
    return fail("missing string field text");
  }
  rec.text = j["text"].get<std::string>();
  if (rec.text.empty() || is_blank(rec.text)) return fail("blank text");

  if (j.contains("mode") && !j["mode"].is_null()) {
    if (!j["mode"].is_string()) return fail("mode must be a string");
    rec.mode = parse_mode(j["mode"].get<std::string>());
    if (!rec.mode) return fail("unknown mode: " + j["mode"].get<std::string>());
  }
  if (j.contains("fine_category") && !j["fine_category"].is_null()) {
    if (!j["fine_category"].is_string()) return fail("fine_category must be a string");
    std::string fine = j["fine_category"].get<std::string>();
    if (!is_fine_label(fine)) return fail("unknown fine category: \"" + fine + "\"");
    rec.fine_category = std::move(fine);
  }
  return rec;
}

std::vector<RawAlertRecord> read_alerts_jsonl(std::istream& in, ParseTally& tally) {
  std::vector<RawAlertRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || is_blank(line)) continue;
    ++tally.lines;
    if (auto rec = parse_alert_line(line)) {
      out.push_back(std::move(*rec));
    } else {
      ++tally.malformed;
    }
  }
  return out;
}

TerminalPhraseRules TerminalPhraseRules::defaults() {
  return {{"delays cleared", "service has resumed", "detour cleared", "residual delays",
           "regular service"}};
}

void TerminalPhraseRules::validate() const {
  if (patterns.empty()) {
    throw std::invalid_argument("terminal phrase rules: no patterns");
  }
  for (const auto& p : patterns) {
    if (p.empty()) throw std::invalid_argument("terminal phrase rules: empty pattern");
  }
}

bool TerminalPhraseRules::matches(std::string_view text) const {
  std::string lower = lowercase(text);
  for (const auto& p : patterns) {
    if (lower.find(lowercase(p)) != std::string::npos) return true;
  }
  return false;
}

std::string infer_fine_category(std::span<const Alert> alerts) {
  const auto& taxonomy = default_taxonomy();
  for (const auto& alert : alerts) {
    std::string lower = lowercase(alert.text);
    const std::string* best = nullptr;
    for (const auto& fine : taxonomy.fine_labels) {
      if (lower.find(fine) == std::string::npos) continue;
      if (!best || fine.size() > best->size()) best = &fine;
    }
    if (best) return *best;
  }
  return "other";
}

std::vector<Event> link_events(std::span<const RawAlertRecord> records) {
  // std::map keeps the grouping order independent of input order
  std::map<std::string, std::vector<const RawAlertRecord*>> by_key;
  for (const auto& rec : records) {
    by_key[rec.event_key].push_back(&rec);
  }

  std::vector<Event> events;
  events.reserve(by_key.size());
  for (auto& [key, group] : by_key) {
    std::vector<Alert> alerts;
    alerts.reserve(group.size());
    std::optional<std::string> annotated;
    std::stable_sort(group.begin(), group.end(),
                     [](const RawAlertRecord* a, const RawAlertRecord* b) {
                       return a->timestamp < b->timestamp;
                     });
    for (const RawAlertRecord* rec : group) {
      alerts.push_back(Alert{rec->event_key, rec->timestamp, rec->text, rec->mode});
      if (!annotated && rec->fine_category) annotated = rec->fine_category;
    }
    std::string fine = annotated ? *annotated : infer_fine_category(alerts);
    events.push_back(make_event(key, std::move(alerts), fine));
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return std::tie(a.start, a.id) < std::tie(b.start, b.id);
  });
  return events;
}

namespace {

bool consistent(const Event& e) {
  if (e.alerts.empty()) return false;
  if (e.start != e.alerts.front().timestamp || e.end != e.alerts.back().timestamp) return false;
  if (e.end < e.start) return false;
  if (e.duration_minutes != static_cast<double>(e.end - e.start) / 60.0) return false;
  if (e.duration_minutes < 0.0) return false;
  for (std::size_t i = 1; i < e.alerts.size(); ++i) {
    const auto& prev = e.alerts[i - 1];
    const auto& cur = e.alerts[i];
    if (cur.timestamp < prev.timestamp) return false;
    if (cur.timestamp == prev.timestamp && cur.text == prev.text) return false;
  }
  if (e.forecast_cut && (*e.forecast_cut < e.start || *e.forecast_cut > e.end)) return false;
  return true;
}

}  // namespace

FinalizeResult finalize_boundaries(std::vector<Event> events,
                                   const TerminalPhraseRules& rules) {
  rules.validate();
  FinalizeResult out;
  out.kept.reserve(events.size());
  for (auto& e : events) {
    if (consistent(e) && rules.matches(e.alerts.back().text)) {
      out.kept.push_back(std::move(e));
    } else {
      ++out.excluded;
    }
  }
  return out;
}

double quantile_linear(std::span<const double> sorted, double p) {
  if (sorted.empty()) {
    throw std::invalid_argument("quantile_linear: empty sample");
  }
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  double h = p * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

StatsTable build_stats(std::span<const Event> events) {
  std::map<std::string, std::vector<double>> durations;
  for (const auto& e : events) {
    durations[e.macro_category].push_back(e.duration_minutes);
  }

  StatsTable table;
  for (const auto& macro : default_taxonomy().macro_labels) {
    auto it = durations.find(macro);
    if (it == durations.end()) continue;  // empty category: no row
    auto& values = it->second;
    std::sort(values.begin(), values.end());

    StatsRow row;
    row.category = macro;
    row.count = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    row.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - row.mean) * (v - row.mean);
    row.std_dev = std::sqrt(sq / static_cast<double>(values.size()));
    row.q25 = quantile_linear(values, 0.25);
    row.q50 = quantile_linear(values, 0.50);
    row.q75 = quantile_linear(values, 0.75);
    row.min = values.front();
    row.max = values.back();
    table.rows.push_back(std::move(row));
  }
  return table;
}

DatasetSplit make_split(std::span<const Event> events, std::uint64_t seed, double fraction) {
  if (events.size() < 2) {
    throw std::invalid_argument("make_split: need at least 2 events");
  }
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("make_split: fraction must lie in (0, 1)");
  }

  std::vector<std::string> ids;
  ids.reserve(events.size());
  for (const auto& e : events) ids.push_back(e.id);
  std::sort(ids.begin(), ids.end());

  Rng rng(seed);
  for (std::size_t i = ids.size() - 1; i > 0; --i) {
    std::swap(ids[i], ids[rng.bounded(i + 1)]);
  }

  auto n_train = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(ids.size())));
  n_train = std::min(n_train, ids.size());

  DatasetSplit split;
  split.seed = seed;
  split.fraction = fraction;
  split.train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  return split;
}

namespace {

// Production tallies: share, mean and median minutes per macro category.
const std::vector<SyntheticCategoryRow> kSyntheticRows = {
    {"external factors", 4696, 91.2, 22.0},
    {"operational", 1834, 94.6, 49.0},
    {"other", 445, 38.3, 20.0},
    {"passenger incident", 4099, 15.4, 11.0},
    {"signal control", 1434, 62.8, 42.0},
    {"station related", 498, 9.2, 7.0},
    {"track infrastructure", 538, 22.7, 10.0},
    {"train mechanical", 7548, 14.6, 9.0},
};

// small pools: location tokens recur often, so text similarity is driven by
// the incident wording rather than by where it happened
const std::vector<std::string> kLines = {"A", "C", "E", "N"};
const std::vector<std::string> kStations = {"Fulton", "Canal", "Marcy", "Steinway"};
const std::vector<std::string> kDirections = {"Northbound", "Southbound"};

std::string_view severity_word(double minutes) {
  if (minutes < 10.0) return "brief";
  if (minutes < 30.0) return "moderate";
  if (minutes < 90.0) return "significant";
  if (minutes < 240.0) return "extended";
  return "prolonged";
}

}  // namespace

std::span<const SyntheticCategoryRow> synthetic_category_rows() { return kSyntheticRows; }

std::vector<Event> generate_synthetic(std::size_t n, std::uint64_t seed) {
  if (n == 0) {
    throw std::invalid_argument("generate_synthetic: n must be >= 1");
  }
  const auto& taxonomy = default_taxonomy();

  std::size_t total = 0;
  for (const auto& row : kSyntheticRows) total += row.count;

  std::vector<Event> events;
  events.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(mix_seed(seed, i));

    std::uint64_t pick = rng.bounded(total);
    const SyntheticCategoryRow* row = &kSyntheticRows.back();
    std::uint64_t acc = 0;
    for (const auto& r : kSyntheticRows) {
      acc += r.count;
      if (pick < acc) {
        row = &r;
        break;
      }
    }

    // log-normal with the category's median and mean
    double sigma_ln = std::sqrt(2.0 * std::log(std::max(row->mean / row->median, 1.0)));
    double minutes = row->median * std::exp(rng.normal(0.0, 1.0) * sigma_ln);
    auto dur_seconds = static_cast<std::int64_t>(std::llround(minutes * 60.0));

    // pick a fine label within the macro category
    std::vector<const std::string*> fines;
    for (const auto& fine : taxonomy.fine_labels) {
      if (taxonomy.fine_to_macro.at(fine) == row->macro) fines.push_back(&fine);
    }
    const std::string& fine = *fines[rng.bounded(fines.size())];

    const std::string& line = kLines[rng.bounded(kLines.size())];
    const std::string& station = kStations[rng.bounded(kStations.size())];
    const std::string& direction = kDirections[rng.bounded(kDirections.size())];

    char id[32];
    std::snprintf(id, sizeof(id), "syn-%06zu", i);
    std::int64_t t0 = 1'588'000'000 + static_cast<std::int64_t>(i) * 900;

    std::optional<TransitMode> mode = TransitMode::subway;
    double mode_draw = rng.u01();
    if (mode_draw > 0.85) mode = mode_draw > 0.97 ? TransitMode::other : TransitMode::bus;

    std::vector<Alert> alerts;
    std::string terminal = line + " train service has resumed, delays cleared.";
    if (dur_seconds > 0) {
      std::string first = direction + " " + line + " trains are delayed while we address a " +
                          fine + " at " + station + "; crews expect a " +
                          std::string(severity_word(static_cast<double>(dur_seconds) / 60.0)) +
                          " disruption.";
      alerts.push_back(Alert{id, t0, std::move(first), mode});
    }
    alerts.push_back(Alert{id, t0 + dur_seconds, std::move(terminal), mode});
    events.push_back(make_event(id, std::move(alerts), fine));
  }
  return events;
}

// --- file formats -----------------------------------------------------------

namespace {

json event_to_json(const Event& e) {
  json j;
  j["id"] = e.id;
  j["start"] = e.start;
  j["end"] = e.end;
  j["duration_minutes"] = std::round(e.duration_minutes * 1000.0) / 1000.0;
  j["fine_category"] = e.fine_category;
  j["macro_category"] = e.macro_category;
  if (e.forecast_cut) j["forecast_cut"] = *e.forecast_cut;
  json alerts = json::array();
  for (const auto& a : e.alerts) {
    json ja;
    ja["timestamp"] = a.timestamp;
    ja["text"] = a.text;
    if (a.mode) ja["mode"] = std::string(mode_name(*a.mode));
    alerts.push_back(std::move(ja));
  }
  j["alerts"] = std::move(alerts);
  return j;
}

std::optional<Event> event_from_json(const json& j) {
  if (!j.is_object()) return std::nullopt;
  if (!j.contains("id") || !j["id"].is_string()) return std::nullopt;
  if (!j.contains("fine_category") || !j["fine_category"].is_string()) return std::nullopt;
  if (!j.contains("alerts") || !j["alerts"].is_array() || j["alerts"].empty()) {
    return std::nullopt;
  }
  std::string id = j["id"].get<std::string>();
  std::vector<Alert> alerts;
  for (const auto& ja : j["alerts"]) {
    if (!ja.is_object() || !ja.contains("timestamp") || !ja["timestamp"].is_number_integer() ||
        !ja.contains("text") || !ja["text"].is_string()) {
      return std::nullopt;
    }
    Alert a;
    a.event_key = id;
    a.timestamp = ja["timestamp"].get<std::int64_t>();
    a.text = ja["text"].get<std::string>();
    if (ja.contains("mode") && ja["mode"].is_string()) {
      a.mode = parse_mode(ja["mode"].get<std::string>());
      if (!a.mode) return std::nullopt;
    }
    alerts.push_back(std::move(a));
  }
  std::optional<std::int64_t> cut;
  if (j.contains("forecast_cut") && !j["forecast_cut"].is_null()) {
    if (!j["forecast_cut"].is_number_integer()) return std::nullopt;
    cut = j["forecast_cut"].get<std::int64_t>();
  }
  try {
    // duration is recomputed from timestamps; the serialized value is display
    return make_event(std::move(id), std::move(alerts), j["fine_category"].get<std::string>(),
                      cut);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

}  // namespace

void write_events_jsonl(std::ostream& out, std::span<const Event> events) {
  for (const auto& e : events) {
    out << event_to_json(e).dump() << '\n';
  }
}

std::vector<Event> read_events_jsonl(std::istream& in, ParseTally& tally) {
  std::vector<Event> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || is_blank(line)) continue;
    ++tally.lines;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (auto e = event_from_json(j)) {
      out.push_back(std::move(*e));
    } else {
      ++tally.malformed;
    }
  }
  return out;
}

void write_alerts_jsonl(std::ostream& out, std::span<const Event> events) {
  for (const auto& e : events) {
    for (const auto& a : e.alerts) {
      json j;
      j["event_key"] = e.id;
      j["timestamp"] = a.timestamp;
      j["text"] = a.text;
      if (a.mode) j["mode"] = std::string(mode_name(*a.mode));
      j["fine_category"] = e.fine_category;
      out << j.dump() << '\n';
    }
  }
}

void write_stats_csv(std::ostream& out, const StatsTable& table) {
  out << "category,count,mean,std,q25,q50,q75,min,max\n";
  for (const auto& row : table.rows) {
    out << row.category << ',' << row.count << ',' << fmt_trim(row.mean) << ','
        << fmt_trim(row.std_dev) << ',' << fmt_trim(row.q25) << ',' << fmt_trim(row.q50) << ','
        << fmt_trim(row.q75) << ',' << fmt_trim(row.min) << ',' << fmt_trim(row.max) << '\n';
  }
}

std::string stats_csv_string(const StatsTable& table) {
  std::ostringstream os;
  write_stats_csv(os, table);
  return os.str();
}

StatsTable read_stats_csv(std::istream& in) {
  StatsTable table;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(pos));
        break;
      }
      cells.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (cells.size() != 9) {
      throw std::runtime_error("stats csv: expected 9 columns, got line: " + line);
    }
    StatsRow row;
    row.category = cells[0];
    row.count = static_cast<std::size_t>(std::stoull(cells[1]));
    row.mean = std::stod(cells[2]);
    row.std_dev = std::stod(cells[3]);
    row.q25 = std::stod(cells[4]);
    row.q50 = std::stod(cells[5]);
    row.q75 = std::stod(cells[6]);
    row.min = std::stod(cells[7]);
    row.max = std::stod(cells[8]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_split_json(std::ostream& out, const DatasetSplit& split) {
  json j;
  j["seed"] = split.seed;
  j["fraction"] = split.fraction;
  j["train_ids"] = split.train_ids;
  j["test_ids"] = split.test_ids;
  out << j.dump(2) << '\n';
}

DatasetSplit read_split_json(std::istream& in) {
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object() || !j.contains("train_ids") ||
      !j.contains("test_ids")) {
    throw std::runtime_error("split file: malformed JSON");
  }
  DatasetSplit split;
  split.seed = j.value("seed", std::uint64_t{0});
  split.fraction = j.value("fraction", 0.0);
  split.train_ids = j["train_ids"].get<std::vector<std::string>>();
  split.test_ids = j["test_ids"].get<std::vector<std::string>>();
  return split;
}

}  // namespace alertcast
