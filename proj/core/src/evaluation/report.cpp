#include "dualmem/evaluation/report.hpp"

#include "dualmem/error.hpp"
#include "dualmem/evaluation/judge.hpp"
#include "dualmem/responder/responder.hpp"
#include "dualmem/retrieval/retrieval.hpp"

namespace dualmem {

namespace {

EvalAggregate aggregate_of(const std::vector<const QueryEval*>& group) {
    EvalAggregate a;
    a.n_queries = group.size();
    std::vector<double> fact, insight;
    bool all_judged = true;
    QualityScore sum;
    for (const auto* q : group) {
        fact.push_back(q->fact_recall);
        insight.push_back(q->insight_recall);
        if (!q->quality) {
            all_judged = false;
            continue;
        }
        sum.info += q->quality->info;
        sum.logic += q->quality->logic;
        sum.consistency += q->quality->consistency;
        sum.attractiveness += q->quality->attractiveness;
        sum.n_judge_calls += q->quality->n_judge_calls;
    }
    a.fact_recall = macro_average(fact);
    a.insight_recall = macro_average(insight);
    if (all_judged) {
        const double n = static_cast<double>(group.size());
        a.quality = QualityScore{sum.info / n, sum.logic / n, sum.consistency / n, sum.attractiveness / n,
                                 sum.n_judge_calls};
    }
    return a;
}

}  // namespace

void EvalConfig::validate() const {
    recall.validate();
    if (judge_runs < 0) fail(ErrorCode::InvalidConfig, "judge_runs must be >= 0");
}

void to_json(Json& j, const EvalConfig& c) {
    j = Json{{"k", c.recall.k}, {"tau", c.recall.tau}, {"judge_runs", c.judge_runs}};
}

void to_json(Json& j, const QueryEval& q) {
    j = Json{{"query_id", q.query_id},
             {"query_type", std::string(to_string(q.query_type))},
             {"fact_recall", q.fact_recall},
             {"insight_recall", q.insight_recall},
             {"retrieved_ids", q.retrieved_ids},
             {"quality", q.quality ? Json(*q.quality) : Json(nullptr)}};
    if (q.response_text) j["response_text"] = *q.response_text;
}

void to_json(Json& j, const EvalAggregate& a) {
    j = Json{{"n_queries", a.n_queries},
             {"fact_recall", a.fact_recall},
             {"insight_recall", a.insight_recall},
             {"quality", a.quality ? Json(*a.quality) : Json(nullptr)}};
}

void to_json(Json& j, const EvalReport& r) {
    Json per_type = Json::object();
    for (const auto& [type, agg] : r.per_type) {
        per_type[std::string(to_string(type))] = agg ? Json(*agg) : Json(nullptr);
    }
    j = Json{{"config", r.config}, {"per_query", r.per_query}, {"per_type", per_type}, {"overall", r.overall}};
}

QueryEval evaluate_record(const RoleMemoRecord& record, const MemoryBank& bank, Embedder& embedder,
                          const EvalConfig& config, Gateway* gateway, const PromptLibrary& prompts) {
    config.validate();
    if (config.judge_runs > 0 && gateway == nullptr) {
        fail(ErrorCode::InvalidConfig, "judging needs a gateway");
    }

    QueryEval out;
    out.query_id = record.query.query_id;
    out.query_type = record.query.query_type;

    const MemoryIndex index = build_index(bank, embedder);
    const RetrievalResult retrieval = retrieve(index, record.query.text, config.recall.k, embedder);

    std::vector<std::string> fact_hits, insight_hits;
    for (const auto& hit : retrieval.primary_hits) {
        out.retrieved_ids.push_back(hit.entry_id);
        (hit.kind == EntryKind::Fact ? fact_hits : insight_hits).push_back(hit.text);
    }
    out.fact_recall = recall_at_k(record.fragments, fact_hits, embedder, config.recall);
    out.insight_recall = recall_at_k({record.gt_insight}, insight_hits, embedder, config.recall);

    if (config.judge_runs > 0) {
        ResponseRecord response = respond(record.persona, record.query, retrieval, *gateway, prompts);
        out.quality = judge_averaged(record.persona, record.query, record.reference_response,
                                     response.response_text, *gateway, config.judge_runs, prompts);
        out.response_text = std::move(response.response_text);
    }
    return out;
}

EvalReport aggregate_report(std::vector<QueryEval> per_query, const EvalConfig& config) {
    if (per_query.empty()) fail(ErrorCode::EmptyInput, "no queries to aggregate");
    EvalReport report;
    report.config = config;
    report.per_query = std::move(per_query);

    std::vector<const QueryEval*> all;
    for (const auto& q : report.per_query) all.push_back(&q);
    report.overall = aggregate_of(all);

    for (QueryType type : all_query_types()) {
        std::vector<const QueryEval*> group;
        for (const auto* q : all) {
            if (q->query_type == type) group.push_back(q);
        }
        report.per_type[type] = group.empty() ? std::nullopt : std::optional<EvalAggregate>(aggregate_of(group));
    }
    return report;
}

}  // namespace dualmem
