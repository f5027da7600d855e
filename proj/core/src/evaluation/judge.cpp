#include "dualmem/evaluation/judge.hpp"

#include <cmath>

#include "dualmem/construction/output_parsing.hpp"
#include "dualmem/error.hpp"

namespace dualmem {

namespace {

constexpr std::string_view kQualityFormat =
    R"(one JSON object {"info": n, "logic": n, "consistency": n, "attractiveness": n} with scores from 1 to 5)";

}  // namespace

ParseOutcome<QualityScore> parse_quality(std::string_view reply) {
    auto j = extract_json(reply);
    if (!j || !j->is_object()) return ParseFailure{ErrorCode::MalformedJudgeOutput, "judge reply is not a JSON object"};

    QualityScore q;
    q.n_judge_calls = 1;
    std::pair<const char*, double*> dims[] = {
        {"info", &q.info}, {"logic", &q.logic}, {"consistency", &q.consistency}, {"attractiveness", &q.attractiveness}};
    for (auto& [key, slot] : dims) {
        auto it = j->find(key);
        if (it == j->end()) return ParseFailure{ErrorCode::MalformedJudgeOutput, std::string("missing '") + key + "'"};
        const Json* v = &*it;
        if (v->is_object() && v->contains("score")) v = &(*v)["score"];
        if (!v->is_number()) {
            return ParseFailure{ErrorCode::MalformedJudgeOutput, std::string("'") + key + "' is not a number"};
        }
        double s = v->get<double>();
        if (!(s >= 1.0 && s <= 5.0)) {
            return ParseFailure{ErrorCode::OutOfRangeScore, std::string("'") + key + "' = " + std::to_string(s)};
        }
        if (std::abs(s * 2.0 - std::round(s * 2.0)) > 1e-9) {
            return ParseFailure{ErrorCode::MalformedJudgeOutput,
                                std::string("'") + key + "' is not on the half-point grid"};
        }
        *slot = s;
    }
    return q;
}

ChatRequest judge_request(const Persona& persona, const Query& query, std::string_view reference,
                          std::string_view candidate, int run_index, const PromptLibrary& prompts) {
    ChatRequest request;
    request.role_tag = RoleTag::Judge;
    request.params = default_params(RoleTag::Judge);
    request.salt = "judge-run-" + std::to_string(run_index);
    request.messages = prompts.get("judge_quality")
                           .render({{"persona", persona_text(persona)},
                                    {"query", query.text},
                                    {"reference", std::string(reference)},
                                    {"candidate", std::string(candidate)}});
    return request;
}

QualityScore judge_once(const Persona& persona, const Query& query, std::string_view reference,
                        std::string_view candidate, Gateway& gateway, int run_index, const PromptLibrary& prompts) {
    return chat_structured<QualityScore>(gateway,
                                         judge_request(persona, query, reference, candidate, run_index, prompts),
                                         prompts, kQualityFormat, parse_quality);
}

QualityScore judge_averaged(const Persona& persona, const Query& query, std::string_view reference,
                            std::string_view candidate, Gateway& gateway, int runs, const PromptLibrary& prompts) {
    if (runs < 1) fail(ErrorCode::InvalidConfig, "judge runs must be >= 1");
    QualityScore sum;
    for (int r = 0; r < runs; ++r) {
        QualityScore q = judge_once(persona, query, reference, candidate, gateway, r, prompts);
        sum.info += q.info;
        sum.logic += q.logic;
        sum.consistency += q.consistency;
        sum.attractiveness += q.attractiveness;
    }
    const double n = static_cast<double>(runs);
    return {sum.info / n, sum.logic / n, sum.consistency / n, sum.attractiveness / n, runs};
}

}  // namespace dualmem
