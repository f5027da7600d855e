#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dualmem/core/types.hpp"

namespace dualmem {

// Strips a surrounding ``` / ```json fence and outer whitespace.
std::string_view strip_code_fence(std::string_view text);

// Parses the first JSON value in `text`: the whole (fence-stripped) text, or
// failing that the span from the first '[' or '{' to the last matching
// closer. nullopt if neither parses.
std::optional<Json> extract_json(std::string_view text);

// Accepts a JSON array of strings (or of {"text": ...} objects), an object
// with a "facts" array, null/"none"/empty output (no facts), or bullet and
// numbered line items. Returns nullopt for anything else.
std::optional<std::vector<std::string>> parse_fact_list(std::string_view text);

struct RawInsight {
    std::string text;
    std::vector<std::string> fact_ids;
};

// Accepts null / [] (no insight), an array of {"text", "fact_ids"} objects,
// an object with an "insights" array, or a single insight object.
// "insight" and "linked_fact_ids" are accepted as key aliases.
std::optional<std::vector<RawInsight>> parse_insight_list(std::string_view text);

}  // namespace dualmem
