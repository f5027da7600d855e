#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dualmem/gateway/chat.hpp"

namespace dualmem {

// A prompt template file is split into sections by header lines `[system]`,
// `[context]`, `[user]` and `[assistant]`. `[system]` and `[context]` become
// system messages, the others keep their speaker. Section bodies have their
// trailing newline stripped.
//
// Placeholders are `{name}` with a lowercase identifier; only names supplied
// at render time are replaced, in a single pass, so braces in example JSON
// are left alone.
//
// Templates and their placeholders:
//   fact_extraction         {persona} {chunk}
//   insight_derivation      {persona} {facts} {prior_memory}
//   role_play               {persona} {memory} {query}
//   judge_quality           {persona} {query} {reference} {candidate}
//   qa_memory_necessity     {persona} {query} {gt_insight} {answer}
//   qa_insight_specificity  {persona} {fragments} {gt_insight}
//   qa_safety               {conversation}
//   reformat                {format}
struct PromptSection {
    std::string tag;
    std::string text;
};

struct PromptTemplate {
    std::string name;
    std::vector<PromptSection> sections;

    static PromptTemplate parse(std::string name, std::string_view text);
    std::vector<ChatMessage> render(const std::map<std::string, std::string>& values) const;
};

std::string substitute(std::string_view text, const std::map<std::string, std::string>& values);

class PromptLibrary {
public:
    // The templates compiled from core/prompts/.
    static const PromptLibrary& defaults();

    // Defaults, with any `<dir>/<name>.txt` file replacing the built-in one.
    static PromptLibrary with_overrides(const std::filesystem::path& dir);

    const PromptTemplate& get(std::string_view name) const;
    std::vector<std::string> names() const;
    std::string raw(std::string_view name) const;

private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
    std::map<std::string, std::string, std::less<>> raw_;
};

}  // namespace dualmem
