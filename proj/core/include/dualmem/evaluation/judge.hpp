#pragma once

#include <string>
#include <string_view>

#include "dualmem/evaluation/metrics.hpp"
#include "dualmem/gateway/gateway.hpp"
#include "dualmem/gateway/structured_chat.hpp"
#include "dualmem/prompts/prompt_library.hpp"

namespace dualmem {

inline constexpr int kDefaultJudgeRuns = 3;

// Reads {"info", "logic", "consistency", "attractiveness"} from a JSON object
// reply. Each score is a number (or {"score": number}) on the half-point grid.
// Scores outside [1, 5] are OutOfRangeScore; anything else unusable is
// MalformedJudgeOutput. Never clamps.
ParseOutcome<QualityScore> parse_quality(std::string_view reply);

// The judge request for run `run_index`; the index is salted into the
// fingerprint so repeated runs are recorded separately.
ChatRequest judge_request(const Persona& persona, const Query& query, std::string_view reference,
                          std::string_view candidate, int run_index = 0,
                          const PromptLibrary& prompts = PromptLibrary::defaults());

// One judge call (temperature 0) with one reformat retry.
QualityScore judge_once(const Persona& persona, const Query& query, std::string_view reference,
                        std::string_view candidate, Gateway& gateway, int run_index = 0,
                        const PromptLibrary& prompts = PromptLibrary::defaults());

// Per-dimension mean of `runs` sequential judge_once calls (run indices
// 0..runs-1). Throws InvalidConfig for runs < 1.
QualityScore judge_averaged(const Persona& persona, const Query& query, std::string_view reference,
                            std::string_view candidate, Gateway& gateway, int runs = kDefaultJudgeRuns,
                            const PromptLibrary& prompts = PromptLibrary::defaults());

}  // namespace dualmem
