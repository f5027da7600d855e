#include "dualmem/dataset/qa.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "dualmem/chunker/chunker.hpp"
#include "dualmem/construction/output_parsing.hpp"
#include "dualmem/error.hpp"
#include "dualmem/gateway/structured_chat.hpp"
#include "dualmem/responder/responder.hpp"

namespace dualmem {

namespace {

constexpr std::array<std::pair<QaCheck, std::string_view>, 4> kNames = {{
    {QaCheck::InsightSpecificity, "insight-specificity"},
    {QaCheck::MemoryNecessity, "memory-necessity"},
    {QaCheck::DifficultyControl, "difficulty"},
    {QaCheck::Safety, "safety"},
}};

constexpr std::array<std::pair<QaCheck, std::string_view>, 4> kEnumNames = {{
    {QaCheck::InsightSpecificity, "InsightSpecificity"},
    {QaCheck::MemoryNecessity, "MemoryNecessity"},
    {QaCheck::DifficultyControl, "DifficultyControl"},
    {QaCheck::Safety, "Safety"},
}};

std::string join_indices(const std::vector<std::size_t>& xs) {
    std::string out = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(xs[i]);
    }
    return out + "]";
}

ChatRequest judge_chat(const PromptLibrary& prompts, std::string_view name,
                       const std::map<std::string, std::string>& values) {
    ChatRequest request;
    request.role_tag = RoleTag::Judge;
    request.params = default_params(RoleTag::Judge);
    request.messages = prompts.get(name).render(values);
    return request;
}

std::string fragments_block(const RoleMemoRecord& record) {
    std::string out;
    for (const auto& f : record.fragments) {
        if (!out.empty()) out += '\n';
        out += "- " + f;
    }
    return out;
}

}  // namespace

std::string_view to_string(QaCheck check) {
    for (const auto& [c, n] : kNames) {
        if (c == check) return n;
    }
    return "unknown";
}

QaCheck qa_check_from_string(std::string_view name) {
    for (const auto& table : {kNames, kEnumNames}) {
        for (const auto& [c, n] : table) {
            if (n == name) return c;
        }
    }
    fail(ErrorCode::InvalidConfig, "unknown QA check '" + std::string(name) + "'");
}

std::vector<QaCheck> parse_qa_checks(std::string_view list) {
    std::vector<QaCheck> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        std::size_t end = list.find(',', pos);
        if (end == std::string_view::npos) end = list.size();
        std::string_view item = list.substr(pos, end - pos);
        pos = end + 1;
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (item.empty()) continue;
        if (item == "all") {
            for (const auto& [c, n] : kNames) {
                if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
            }
            continue;
        }
        QaCheck c = qa_check_from_string(item);
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    if (out.empty()) fail(ErrorCode::InvalidConfig, "no QA checks selected");
    return out;
}

void to_json(Json& j, const QaVerdict& v) {
    j = Json{{"check", std::string(to_string(v.check))}, {"passed", v.passed}, {"detail", v.detail}};
}

QaVerdict check_difficulty(const RoleMemoRecord& record) {
    QaVerdict verdict{QaCheck::DifficultyControl, true, ""};
    const auto& turns = record.conversation.turns;
    for (const auto& fragment : record.fragments) {
        auto pos = record.fragment_positions.find(fragment);
        std::vector<std::size_t> utterance_turns, fragment_turns;
        for (const auto& t : turns) {
            if (pos != record.fragment_positions.end() && t.content == pos->second) {
                utterance_turns.push_back(t.turn_index);
            }
            if (t.role == Speaker::User && t.content.find(fragment) != std::string::npos) {
                fragment_turns.push_back(t.turn_index);
            }
        }
        if (utterance_turns.size() == 1 && fragment_turns.size() == 1) continue;
        verdict.passed = false;
        if (!verdict.detail.empty()) verdict.detail += "; ";
        verdict.detail += "fragment '" + fragment + "': utterance in turns " + join_indices(utterance_turns) +
                          ", fragment in user turns " + join_indices(fragment_turns);
    }
    if (verdict.passed) verdict.detail = "every fragment sits in a single turn";
    return verdict;
}

JudgeBoolean judge_boolean(Gateway& judge, ChatRequest request, std::string_view key,
                           const PromptLibrary& prompts) {
    const std::string k(key);
    const std::string format = "one JSON object {\"" + k + "\": true|false, \"rationale\": \"...\"}";
    return chat_structured<JudgeBoolean>(
        judge, std::move(request), prompts, format, [&](std::string_view reply) -> ParseOutcome<JudgeBoolean> {
            auto j = extract_json(reply);
            if (!j || !j->is_object()) return ParseFailure{ErrorCode::MalformedJudgeOutput, "reply is not a JSON object"};
            auto it = j->find(k);
            if (it == j->end() || !it->is_boolean()) {
                return ParseFailure{ErrorCode::MalformedJudgeOutput, "'" + k + "' missing or not a boolean"};
            }
            JudgeBoolean out;
            out.value = it->get<bool>();
            if (auto r = j->find("rationale"); r != j->end() && r->is_string()) out.rationale = r->get<std::string>();
            out.raw = *j;
            return out;
        });
}

QaVerdict check_memory_necessity(const RoleMemoRecord& record, Gateway& agent, Gateway& judge,
                                 const PromptLibrary& prompts) {
    ResponseRecord answer = respond(record.persona, record.query, RetrievalResult{}, agent, prompts);
    JudgeBoolean b = judge_boolean(judge,
                                   judge_chat(prompts, "qa_memory_necessity",
                                              {{"persona", persona_text(record.persona)},
                                               {"query", record.query.text},
                                               {"gt_insight", record.gt_insight},
                                               {"answer", answer.response_text}}),
                                   "captures_insight", prompts);
    return {QaCheck::MemoryNecessity, !b.value, b.rationale};
}

QaVerdict check_insight_specificity(const RoleMemoRecord& record, Gateway& judge, const PromptLibrary& prompts) {
    JudgeBoolean b = judge_boolean(judge,
                                   judge_chat(prompts, "qa_insight_specificity",
                                              {{"persona", persona_text(record.persona)},
                                               {"fragments", fragments_block(record)},
                                               {"gt_insight", record.gt_insight}}),
                                   "persona_specific", prompts);
    return {QaCheck::InsightSpecificity, b.value, b.rationale};
}

QaVerdict check_safety(const RoleMemoRecord& record, Gateway& judge, const PromptLibrary& prompts) {
    validate_conversation(record.conversation);
    JudgeBoolean b = judge_boolean(
        judge, judge_chat(prompts, "qa_safety", {{"conversation", render_turns(record.conversation.turns)}}), "safe",
        prompts);
    std::string detail = b.rationale;
    if (auto v = b.raw.find("violations"); v != b.raw.end() && v->is_array() && !v->empty()) {
        detail += (detail.empty() ? "" : " ") + std::string("violations: ") + v->dump();
    }
    return {QaCheck::Safety, b.value, detail};
}

}  // namespace dualmem
