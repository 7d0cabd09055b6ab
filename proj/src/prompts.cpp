#include "alertcast/prompts.hpp"

#include <sstream>
#include <stdexcept>

#include "alertcast/format.hpp"
#include "alertcast/ingestion.hpp"

namespace alertcast {

namespace {

constexpr std::string_view kBaseInstruction =
    "Based on the following transit alert(s), predict the total duration of the delay in "
    "minutes.";
constexpr std::string_view kCotAddon = "Let's think step by step.";
constexpr std::string_view kBoxedInstruction =
    "Put the final numeric answer in minutes inside \\boxed{}.";

std::string alert_block(const Event& event) {
  std::ostringstream os;
  os << "Alerts:\n";
  for (const Alert* a : visible_alerts(event)) {
    double offset_min = static_cast<double>(a->timestamp - event.start) / 60.0;
    os << "[+" << fmt_trim(offset_min, 3) << " min] " << a->text << '\n';
  }
  return os.str();
}

std::string category_addon(const CategoryTaxonomy& taxonomy) {
  std::string list;
  for (const auto& fine : taxonomy.fine_labels) {
    if (!list.empty()) list += ", ";
    list += fine;
  }
  return "First infer the incident category from the list {" + list +
         "}, then predict the duration.";
}

std::string stats_addon(const StatsTable& stats) {
  return "You may consult the per-category statistics table {\n" + stats_csv_string(stats) +
         "} to calibrate your prediction.";
}

}  // namespace

std::optional<PromptVariant> parse_prompt_variant(std::string_view s) {
  if (s == "p1" || s == "P1") return PromptVariant::p1;
  if (s == "p2" || s == "P2") return PromptVariant::p2;
  if (s == "p3" || s == "P3") return PromptVariant::p3;
  return std::nullopt;
}

std::string_view prompt_variant_name(PromptVariant v) {
  switch (v) {
    case PromptVariant::p1: return "p1";
    case PromptVariant::p2: return "p2";
    case PromptVariant::p3: return "p3";
  }
  return "p1";
}

std::string render_prompt(const Event& event, PromptVariant variant,
                          const CategoryTaxonomy* taxonomy, const StatsTable* stats,
                          const PromptOptions& options) {
  if (variant != PromptVariant::p1 && taxonomy == nullptr) {
    throw std::invalid_argument("render_prompt: p2/p3 require a category taxonomy");
  }
  if (variant == PromptVariant::p3 && stats == nullptr) {
    throw std::invalid_argument("render_prompt: p3 requires a stats table");
  }

  std::string alerts = alert_block(event);

  std::string tail;
  switch (variant) {
    case PromptVariant::p1:
      tail = std::string(kCotAddon) + "\n";
      break;
    case PromptVariant::p2:
      tail = category_addon(*taxonomy) + "\n";
      break;
    case PromptVariant::p3:
      tail = category_addon(*taxonomy) + "\n" + stats_addon(*stats) + "\n";
      break;
  }
  tail += std::string(kBoxedInstruction) + "\n";

  std::size_t fixed = kBaseInstruction.size() + 2 + 1 + tail.size();  // "\n\n" + "\n"
  if (fixed + alerts.size() > options.max_chars && options.max_chars > fixed) {
    // left-truncate the alert block, keeping the most recent text
    std::size_t keep = options.max_chars - fixed;
    alerts = alerts.substr(alerts.size() - keep);
  }

  std::string out;
  out.reserve(fixed + alerts.size());
  out += kBaseInstruction;
  out += "\n\n";
  out += alerts;
  out += "\n";
  out += tail;
  return out;
}

}  // namespace alertcast
