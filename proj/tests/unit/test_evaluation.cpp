#include <doctest.h>

#include <cmath>
#include <random>

#include "dualmem/construction/builder.hpp"
#include "dualmem/evaluation/judge.hpp"
#include "dualmem/evaluation/metrics.hpp"
#include "dualmem/evaluation/report.hpp"
#include "dualmem/testing/scripted_llm.hpp"
#include "expect.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dualmem;
using dualmem::test::code_of;
using dualmem::testing::ScriptedTransport;
using dualmem::testing::Stage;

TEST_SUITE_BEGIN("evaluation");

namespace {

QualityScore q4(double a, double b, double c, double d) {
    QualityScore q;
    q.info = a;
    q.logic = b;
    q.consistency = c;
    q.attractiveness = d;
    return q;
}

}  // namespace

TEST_CASE("agreement over the cross-judge rows") {
    // Reference values computed by hand: 1 - mean(|a - b| / a).
    CHECK(agreement(q4(3.65, 3.29, 4.08, 4.02), q4(3.68, 3.32, 4.10, 4.04)) == doctest::Approx(0.993196).epsilon(1e-6));
    CHECK(agreement(q4(4.07, 3.54, 4.17, 4.12), q4(4.09, 3.58, 4.19, 4.15)) == doctest::Approx(0.992927).epsilon(1e-6));
    CHECK(agreement(q4(4.22, 3.78, 4.37, 4.27), q4(4.25, 3.81, 4.39, 4.31)) == doctest::Approx(0.992752).epsilon(1e-6));
    CHECK(agreement(q4(4, 4, 4, 4), q4(4, 4, 4, 4)) == 1.0);
    CHECK(agreement(q4(2, 2, 2, 2), q4(4, 4, 4, 4)) != agreement(q4(4, 4, 4, 4), q4(2, 2, 2, 2)));
}

TEST_CASE("pearson") {
    std::vector<double> x{1, 2, 3};
    std::vector<double> neg{-1, -2, -3};
    std::vector<double> y{1, 2, 4};
    CHECK(pearson(x, x) == doctest::Approx(1.0));
    CHECK(pearson(x, neg) == doctest::Approx(-1.0));
    // sxy = 3, sxx = 2, syy = 14/3: 3 / sqrt(28/3) = 0.981981.
    CHECK(pearson(x, y) == doctest::Approx(3.0 / std::sqrt(28.0 / 3.0)).epsilon(1e-12));
    CHECK(std::fabs(pearson(x, y) - 0.9820) < 1e-4);
    CHECK(code_of([&] { pearson(x, std::vector<double>{1, 2}); }) == ErrorCode::LengthMismatch);
    CHECK(code_of([&] { pearson(std::vector<double>{1}, std::vector<double>{1}); }) == ErrorCode::EmptyInput);
    CHECK(code_of([&] { pearson(x, std::vector<double>{2, 2, 2}); }) == ErrorCode::ZeroVariance);
}

TEST_CASE("group advantage") {
    auto a = group_advantage(std::vector<double>{1, 2, 3});
    REQUIRE(a.size() == 3);
    CHECK(a[0] == doctest::Approx(-std::sqrt(1.5)));
    CHECK(a[1] == doctest::Approx(0.0));
    CHECK(a[2] == doctest::Approx(std::sqrt(1.5)));
    CHECK(group_advantage(std::vector<double>{0.4, 0.4, 0.4}) == std::vector<double>{0, 0, 0});
    CHECK(group_advantage(std::vector<double>{0.7}) == std::vector<double>{0});
    CHECK(group_advantage(std::vector<double>{}).empty());

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> r(2 + rng() % 10);
        for (auto& x : r) x = u(rng);
        auto got = group_advantage(r);
        auto want = oracle::advantage(r);
        for (std::size_t k = 0; k < r.size(); ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-9));
    }
}

TEST_CASE("scalar reward") {
    CHECK(scalar_reward(true, q4(4, 4, 4, 4)) == doctest::Approx(0.8));
    CHECK(scalar_reward(false, q4(5, 5, 5, 5)) == 0.0);
    CHECK(scalar_reward(true, q4(3, 4, 4.5, 4.5)) == doctest::Approx(0.8));
    CHECK(code_of([] { scalar_reward(true, q4(6, 4, 4, 4)); }) == ErrorCode::OutOfRangeScore);
    CHECK(code_of([] { validate_quality(q4(0.5, 4, 4, 4)); }) == ErrorCode::OutOfRangeScore);
}

TEST_CASE("recall on vectors") {
    // gt0 matches retrieved[1] at cosine 0.8; gt1 at 0.6; gt2 exactly.
    std::vector<Embedding> gt{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    std::vector<Embedding> retrieved{{0, 0.6f, 0.8f}, {0.8f, 0, 0.6f}, {0, 0, 1}};
    RecallConfig cfg{2, 0.7};
    RecallDetail d = recall_detail_vectors(gt, retrieved, cfg);
    CHECK(d.recalled == std::vector<bool>{true, false, true});
    CHECK(d.value == doctest::Approx(2.0 / 3.0));
    CHECK(d.best_cosine[1] == doctest::Approx(0.6));

    RecallConfig k1{1, 0.7};
    CHECK(recall_detail_vectors(gt, retrieved, k1).value == doctest::Approx(1.0 / 3.0));
    RecallConfig loose{2, 0.55};
    CHECK(recall_detail_vectors(gt, retrieved, loose).value == doctest::Approx(1.0));

    RecallDetail none = recall_detail_vectors(gt, std::vector<Embedding>{}, cfg);
    CHECK(none.value == 0.0);
    CHECK(std::isinf(none.best_cosine[0]));
    CHECK(code_of([&] { recall_detail_vectors(std::vector<Embedding>{}, retrieved, cfg); }) ==
          ErrorCode::EmptyGroundTruth);
    CHECK(code_of([&] { recall_detail_vectors(gt, retrieved, RecallConfig{0, 0.7}); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([&] { recall_detail_vectors(gt, retrieved, RecallConfig{3, 0.0}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("recall on texts matches the oracle and is monotone") {
    std::mt19937_64 rng(17);
    HashEmbedder embedder;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> gt;
        std::vector<std::string> retrieved;
        for (std::size_t i = 0; i < 1 + rng() % 4; ++i) gt.push_back(test::random_sentence(rng, 2, 6));
        for (std::size_t i = 0; i < rng() % 15; ++i) {
            retrieved.push_back(rng() % 3 == 0 ? gt[rng() % gt.size()] + " indeed" : test::random_sentence(rng, 2, 6));
        }
        std::vector<Embedding> gv;
        std::vector<Embedding> rv;
        for (const auto& t : gt) gv.push_back(embedder.embed_one(t));
        for (const auto& t : retrieved) rv.push_back(embedder.embed_one(t));
        double prev_k = -1.0;
        for (std::size_t k = 1; k <= 16; k += 3) {
            double prev_tau = 2.0;
            for (double tau : {0.65, 0.6713, 0.7029, 0.7377, 0.75}) {
                RecallDetail d = recall_detail(gt, retrieved, embedder, RecallConfig{k, tau});
                CHECK(d.recalled == oracle::recalled_set(gv, rv, k, tau));
                CHECK(d.value <= prev_tau);
                prev_tau = d.value;
            }
            double at_k = recall_at_k(gt, retrieved, embedder, RecallConfig{k, 0.7});
            CHECK(at_k >= prev_k);
            prev_k = at_k;
        }
    }
}

TEST_CASE("macro average") {
    CHECK(macro_average(std::vector<double>{0.5, 1.0, 0.0}) == doctest::Approx(0.5));
    CHECK(code_of([] { macro_average(std::vector<double>{}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("judge output parsing") {
    auto ok = parse_quality(R"({"info": 4, "logic": 3.5, "consistency": {"score": 5}, "attractiveness": 1})");
    REQUIRE(std::holds_alternative<QualityScore>(ok));
    CHECK(std::get<QualityScore>(ok).logic == 3.5);
    CHECK(std::get<QualityScore>(ok).consistency == 5.0);

    auto code = [](std::string_view reply) {
        auto r = parse_quality(reply);
        return std::holds_alternative<ParseFailure>(r) ? std::get<ParseFailure>(r).code : ErrorCode::IoError;
    };
    CHECK(code(R"({"info": 6, "logic": 4, "consistency": 4, "attractiveness": 4})") == ErrorCode::OutOfRangeScore);
    CHECK(code(R"({"info": 0.5, "logic": 4, "consistency": 4, "attractiveness": 4})") == ErrorCode::OutOfRangeScore);
    CHECK(code(R"({"info": 3.3, "logic": 4, "consistency": 4, "attractiveness": 4})") ==
          ErrorCode::MalformedJudgeOutput);
    CHECK(code(R"({"info": 4, "logic": 4, "consistency": 4})") == ErrorCode::MalformedJudgeOutput);
    CHECK(code(R"({"info": "high", "logic": 4, "consistency": 4, "attractiveness": 4})") ==
          ErrorCode::MalformedJudgeOutput);
    CHECK(code("excellent answer") == ErrorCode::MalformedJudgeOutput);
}

TEST_CASE("judge averaging over runs") {
    auto transport = std::make_shared<ScriptedTransport>();
    std::vector<std::string> replies{R"({"info": 4, "logic": 4, "consistency": 4, "attractiveness": 4})",
                                     R"({"info": 4, "logic": 4, "consistency": 4, "attractiveness": 4})",
                                     R"({"info": 5, "logic": 3, "consistency": 4, "attractiveness": 4})"};
    std::size_t next = 0;
    transport->set_handler(Stage::JudgeQuality, [&](const testing::ChatCall&) { return replies[next++]; });
    auto gw = testing::make_scripted_gateway(transport);
    Query q{"q1", "What now?", QueryType::DecisionGuidance};
    QualityScore s = judge_averaged(test::make_persona(), q, "ref", "cand", *gw, 3);
    CHECK(s.info == doctest::Approx(13.0 / 3.0));
    CHECK(s.logic == doctest::Approx(11.0 / 3.0));
    CHECK(s.consistency == doctest::Approx(4.0));
    CHECK(s.n_judge_calls == 3);
    CHECK(code_of([&] { judge_averaged(test::make_persona(), q, "r", "c", *gw, 0); }) == ErrorCode::InvalidConfig);

    ChatRequest r0 = judge_request(test::make_persona(), q, "ref", "cand", 0);
    ChatRequest r1 = judge_request(test::make_persona(), q, "ref", "cand", 1);
    CHECK(r0.role_tag == RoleTag::Judge);
    CHECK(r0.params.temperature == 0.0);
    CHECK(fingerprint(r0) != fingerprint(r1));
}

TEST_CASE("out-of-range judge scores are never clamped") {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->set_handler(Stage::JudgeQuality, [](const testing::ChatCall&) {
        return std::string(R"({"info": 6, "logic": 4, "consistency": 4, "attractiveness": 4})");
    });
    auto gw = testing::make_scripted_gateway(transport);
    Query q{"q1", "What now?", QueryType::DecisionGuidance};
    CHECK(code_of([&] { judge_once(test::make_persona(), q, "r", "c", *gw); }) == ErrorCode::OutOfRangeScore);
    CHECK(transport->calls() == 2);
}

TEST_CASE("evaluate_record splits fact and insight recall") {
    RoleMemoRecord record = test::make_record();
    HashEmbedder embedder;
    MemoryBank bank(record.persona.id, record.conversation.id, BankMode::Dual);
    StepDelta s1;
    s1.facts = {{make_entry_id(record.conversation.id, 1, EntryKind::Fact, 0), record.fragments[0], 1,
                 make_chunk_id(record.conversation.id, 1), std::nullopt}};
    s1.insights = {{make_entry_id(record.conversation.id, 1, EntryKind::Insight, 0), record.gt_insight, 1,
                    {s1.facts[0].entry_id}, std::nullopt}};
    bank.append_step(s1);

    EvalConfig cfg;
    cfg.judge_runs = 0;
    QueryEval e = evaluate_record(record, bank, embedder, cfg, nullptr);
    CHECK(e.query_id == record.query.query_id);
    CHECK(e.fact_recall == doctest::Approx(0.5));
    CHECK(e.insight_recall == doctest::Approx(1.0));
    CHECK(e.retrieved_ids.size() == 2);
    CHECK_FALSE(e.quality.has_value());

    MemoryBank fact_only(record.persona.id, record.conversation.id, BankMode::FactOnly);
    fact_only.append_step({s1.facts, {}});
    QueryEval f = evaluate_record(record, fact_only, embedder, cfg, nullptr);
    CHECK(f.fact_recall == doctest::Approx(0.5));
    CHECK(f.insight_recall == 0.0);

    auto gw = testing::make_scripted_gateway(std::make_shared<ScriptedTransport>());
    EvalConfig judged;
    judged.judge_runs = 2;
    QueryEval g = evaluate_record(record, bank, embedder, judged, gw.get());
    REQUIRE(g.quality.has_value());
    CHECK(g.quality->n_judge_calls == 2);
    CHECK(g.response_text.has_value());
}

TEST_CASE("aggregate report") {
    std::vector<QueryEval> rows(3);
    rows[0].query_id = "a";
    rows[0].query_type = QueryType::DecisionGuidance;
    rows[0].fact_recall = 1.0;
    rows[0].insight_recall = 0.0;
    rows[1].query_id = "b";
    rows[1].query_type = QueryType::DecisionGuidance;
    rows[1].fact_recall = 0.5;
    rows[1].insight_recall = 1.0;
    rows[2].query_id = "c";
    rows[2].query_type = QueryType::ValueJudgment;
    rows[2].fact_recall = 0.0;
    rows[2].insight_recall = 1.0;
    rows[2].quality = q4(4, 4, 4, 4);

    EvalConfig cfg;
    EvalReport rep = aggregate_report(rows, cfg);
    CHECK(rep.overall.n_queries == 3);
    CHECK(rep.overall.fact_recall == doctest::Approx(0.5));
    CHECK(rep.overall.insight_recall == doctest::Approx(2.0 / 3.0));
    CHECK_FALSE(rep.overall.quality.has_value());
    REQUIRE(rep.per_type.size() == 4);
    REQUIRE(rep.per_type.at(QueryType::DecisionGuidance).has_value());
    CHECK(rep.per_type.at(QueryType::DecisionGuidance)->fact_recall == doctest::Approx(0.75));
    REQUIRE(rep.per_type.at(QueryType::ValueJudgment).has_value());
    CHECK(rep.per_type.at(QueryType::ValueJudgment)->quality.has_value());
    CHECK_FALSE(rep.per_type.at(QueryType::InterpretiveAttribution).has_value());

    Json j = rep;
    CHECK(j.contains("config"));
    CHECK(j["per_type"].size() == 4);
    CHECK(j["per_query"].size() == 3);
    CHECK(code_of([&] { aggregate_report({}, cfg); }) == ErrorCode::EmptyInput);
}

TEST_SUITE_END();
