#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dualmem/core/types.hpp"
#include "dualmem/gateway/gateway.hpp"
#include "dualmem/prompts/prompt_library.hpp"

namespace dualmem {

enum class QaCheck { InsightSpecificity, MemoryNecessity, DifficultyControl, Safety };

// "insight-specificity", "memory-necessity", "difficulty", "safety".
std::string_view to_string(QaCheck check);
// Accepts the names above and the enum spellings. Throws InvalidConfig.
QaCheck qa_check_from_string(std::string_view name);
// Comma-separated list; "all" selects every check.
std::vector<QaCheck> parse_qa_checks(std::string_view list);

struct QaVerdict {
    QaCheck check = QaCheck::DifficultyControl;
    bool passed = false;
    std::string detail;
};

void to_json(Json& j, const QaVerdict& v);

// Offline. Passes iff, for every fragment, its annotated utterance is the
// content of exactly one turn and the fragment text occurs in exactly one User
// turn. Failures list the offending turn indices.
QaVerdict check_difficulty(const RoleMemoRecord& record);

// The role-play agent answers persona + query with no memory; the judge says
// whether that answer already captures gt_insight. Passes iff it does not.
QaVerdict check_memory_necessity(const RoleMemoRecord& record, Gateway& agent, Gateway& judge,
                                 const PromptLibrary& prompts = PromptLibrary::defaults());

// Passes iff the judge finds gt_insight persona-specific.
QaVerdict check_insight_specificity(const RoleMemoRecord& record, Gateway& judge,
                                    const PromptLibrary& prompts = PromptLibrary::defaults());

// Passes iff the judge finds the whole conversation free of violence and
// privacy violations. Throws SchemaViolation for an invalid conversation.
QaVerdict check_safety(const RoleMemoRecord& record, Gateway& judge,
                       const PromptLibrary& prompts = PromptLibrary::defaults());

// Parses {"<key>": bool, "rationale": string}. Throws MalformedJudgeOutput
// after one reformat retry.
struct JudgeBoolean {
    bool value = false;
    std::string rationale;
    Json raw;
};
JudgeBoolean judge_boolean(Gateway& judge, ChatRequest request, std::string_view key,
                           const PromptLibrary& prompts = PromptLibrary::defaults());

}  // namespace dualmem
