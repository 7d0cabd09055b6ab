#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "alertcast/alert_model.hpp"

namespace alertcast {

// Prompt templates that incrementally inject dataset-level knowledge:
// p1 adds a step-by-step nudge, p2 the fine category list, p3 the category
// list plus the per-category statistics table.
enum class PromptVariant { p1, p2, p3 };

std::optional<PromptVariant> parse_prompt_variant(std::string_view s);
std::string_view prompt_variant_name(PromptVariant v);

struct PromptOptions {
  // character budget; the alert block is left-truncated (oldest text dropped
  // first) so the instructions always survive
  std::size_t max_chars = 8192;
};

// Renders the prompt from the event's visible alerts. p2/p3 require a
// taxonomy, p3 a stats table; violations throw std::invalid_argument.
// Rendering is deterministic and never includes alerts past forecast_cut.
std::string render_prompt(const Event& event, PromptVariant variant,
                          const CategoryTaxonomy* taxonomy = nullptr,
                          const StatsTable* stats = nullptr,
                          const PromptOptions& options = {});

}  // namespace alertcast
