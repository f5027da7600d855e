#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualmem/core/memory_bank.hpp"
#include "dualmem/evaluation/metrics.hpp"
#include "dualmem/gateway/gateway.hpp"
#include "dualmem/prompts/prompt_library.hpp"

namespace dualmem {

struct EvalConfig {
    RecallConfig recall;
    // 0 disables response generation and judging.
    int judge_runs = 3;

    void validate() const;
};

void to_json(Json& j, const EvalConfig& c);

struct QueryEval {
    std::string query_id;
    QueryType query_type = QueryType::InterpretiveAttribution;
    double fact_recall = 0.0;
    double insight_recall = 0.0;
    std::vector<std::string> retrieved_ids;
    std::optional<QualityScore> quality;
    std::optional<std::string> response_text;
};

struct EvalAggregate {
    std::size_t n_queries = 0;
    double fact_recall = 0.0;
    double insight_recall = 0.0;
    // Present only when every query in the group was judged.
    std::optional<QualityScore> quality;
};

struct EvalReport {
    EvalConfig config;
    std::vector<QueryEval> per_query;
    // All four query types; nullopt for types with no queries.
    std::map<QueryType, std::optional<EvalAggregate>> per_type;
    EvalAggregate overall;
};

void to_json(Json& j, const QueryEval& q);
void to_json(Json& j, const EvalAggregate& a);
void to_json(Json& j, const EvalReport& r);

// Retrieves the top recall.k entries for the query, then scores
//   fact_recall    = recall(fragments, fact-kind hits)
//   insight_recall = recall([gt_insight], insight-kind hits)
// With judge_runs > 0 the role-play agent answers from the retrieved context
// and the judge scores it against the reference response. `gateway` may be
// null only when judge_runs == 0.
QueryEval evaluate_record(const RoleMemoRecord& record, const MemoryBank& bank, Embedder& embedder,
                          const EvalConfig& config, Gateway* gateway,
                          const PromptLibrary& prompts = PromptLibrary::defaults());

// Macro averages per query type and overall, in the given query order.
// Throws EmptyInput for no queries.
EvalReport aggregate_report(std::vector<QueryEval> per_query, const EvalConfig& config);

}  // namespace dualmem
