#include <doctest.h>

#include <random>
#include <set>

#include "dualmem/gateway/embedder.hpp"
#include "dualmem/retrieval/retrieval.hpp"
#include "dualmem/retrieval/vector_ops.hpp"
#include "expect.hpp"
#include "oracles.hpp"

using namespace dualmem;
using dualmem::test::code_of;

TEST_SUITE_BEGIN("retrieval");

namespace {

Embedding axis(std::size_t dim, std::size_t i, float scale = 1.0f) {
    Embedding v(dim, 0.0f);
    v[i] = scale;
    return v;
}

FactEntry fact(std::size_t step, std::size_t n, std::string text, std::optional<Embedding> e) {
    return {make_entry_id("c", step, EntryKind::Fact, n), std::move(text), step, make_chunk_id("c", step), std::move(e)};
}

InsightEntry insight(std::size_t step, std::size_t n, std::string text, std::vector<std::string> links, Embedding e) {
    return {make_entry_id("c", step, EntryKind::Insight, n), std::move(text), step, std::move(links), std::move(e)};
}

MemoryBank small_bank(BankMode mode = BankMode::Dual) {
    MemoryBank bank(1, "c", mode);
    StepDelta s1;
    s1.facts = {fact(1, 0, "boat", axis(4, 0)), fact(1, 1, "job", axis(4, 1))};
    if (mode != BankMode::FactOnly) s1.insights = {insight(1, 0, "torn", {"c:1:fact:0", "c:1:fact:1"}, axis(4, 2))};
    bank.append_step(s1);
    StepDelta s2;
    s2.facts = {fact(2, 0, "harbor", axis(4, 3))};
    bank.append_step(s2);
    return bank;
}

}  // namespace

TEST_CASE("cosine and dot") {
    Embedding a{1, 2, 2};
    Embedding b{2, 1, 2};
    CHECK(cosine(a, b) == doctest::Approx(8.0 / 9.0));
    CHECK(dot(a, b) == doctest::Approx(8.0));
    CHECK(code_of([&] { cosine(a, Embedding{1, 2}); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { cosine(a, Embedding{0, 0, 0}); }) == ErrorCode::ZeroVector);
}

TEST_CASE("render_entry_line") {
    CHECK(render_entry_line(EntryKind::Fact, "c:1:fact:0", "boat") == "[FACT] c:1:fact:0: boat");
    CHECK(render_entry_line(EntryKind::Insight, "c:1:insight:0", "x") == "[INSIGHT] c:1:insight:0: x");
}

TEST_CASE("index rows follow bank order and are normalized") {
    MemoryBank bank(1, "c", BankMode::Dual);
    bank.append_step({{fact(1, 0, "a", axis(3, 0, 5.0f))}, {}});
    HashEmbedder unused;
    MemoryIndex index = build_index(bank, unused);
    REQUIRE(index.rows() == 1);
    CHECK(index.row(0)[0] == doctest::Approx(1.0));
}

TEST_CASE("retrieval expands insight links") {
    MemoryBank bank = small_bank();
    HashEmbedder unused;
    MemoryIndex index = build_index(bank, unused);
    CHECK(index.rows() == 4);

    Embedding q{0.1f, 0.0f, 1.0f, 0.0f};
    RetrievalResult r = index.retrieve_vector(q, 1);
    REQUIRE(r.primary_hits.size() == 1);
    CHECK(r.primary_hits[0].entry_id == "c:1:insight:0");
    CHECK(r.primary_hits[0].kind == EntryKind::Insight);
    CHECK(r.expanded_fact_ids == std::vector<std::string>{"c:1:fact:0", "c:1:fact:1"});
    CHECK(r.rendered_context ==
          "[INSIGHT] c:1:insight:0: torn\n[FACT] c:1:fact:0: boat\n[FACT] c:1:fact:1: job");

    RetrievalResult r2 = index.retrieve_vector(q, 2);
    REQUIRE(r2.primary_hits.size() == 2);
    CHECK(r2.primary_hits[1].entry_id == "c:1:fact:0");
    CHECK(r2.expanded_fact_ids == std::vector<std::string>{"c:1:fact:1"});
}

TEST_CASE("fact-only and insight-only indexes") {
    HashEmbedder unused;
    MemoryIndex facts = build_index(small_bank(BankMode::FactOnly), unused);
    CHECK(facts.rows() == 3);
    for (const auto& e : facts.entries()) CHECK(e.kind == EntryKind::Fact);

    MemoryIndex insights = build_index(small_bank(BankMode::InsightOnly), unused);
    REQUIRE(insights.rows() == 1);
    RetrievalResult r = insights.retrieve_vector(axis(4, 2), 5);
    CHECK(r.primary_hits.size() == 1);
    CHECK(r.expanded_fact_ids.size() == 2);
}

TEST_CASE("k larger than the bank and k = 0") {
    HashEmbedder embedder;
    MemoryBank bank(1, "c", BankMode::Dual);
    bank.append_step({{fact(1, 0, "alpha", std::nullopt), fact(1, 1, "beta", std::nullopt)}, {}});
    MemoryIndex index = build_index(bank, embedder);
    CHECK(index.dimension() == 64);
    CHECK(retrieve(index, "alpha", 50, embedder).primary_hits.size() == 2);
    CHECK(retrieve(index, "alpha", 1, embedder).primary_hits[0].entry_id == "c:1:fact:0");
    CHECK(code_of([&] { retrieve(index, "alpha", 0, embedder); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("empty bank retrieves nothing") {
    oracle::TableEmbedder never;
    MemoryIndex index = build_index(MemoryBank(1, "c", BankMode::Dual), never);
    RetrievalResult r = retrieve(index, "anything", 10, never);
    CHECK(r.empty());
    CHECK(r.rendered_context.empty());
}

TEST_CASE("ties keep bank order") {
    MemoryBank bank(1, "c", BankMode::Dual);
    bank.append_step({{fact(1, 0, "x", axis(2, 0)), fact(1, 1, "y", axis(2, 1)), fact(1, 2, "z", axis(2, 0))}, {}});
    HashEmbedder unused;
    MemoryIndex index = build_index(bank, unused);
    auto hits = index.top_k(axis(2, 0), 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].entry_id == "c:1:fact:0");
    CHECK(hits[1].entry_id == "c:1:fact:2");
    CHECK(hits[2].entry_id == "c:1:fact:1");
}

TEST_CASE("mixed dimensions are rejected") {
    MemoryBank bank(1, "c", BankMode::Dual);
    bank.append_step({{fact(1, 0, "x", axis(2, 0)), fact(1, 1, "y", axis(3, 1))}, {}});
    HashEmbedder unused;
    CHECK(code_of([&] { build_index(bank, unused); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("randomized top-k matches brute force") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 40;
        MemoryBank bank(1, "c", BankMode::Dual);
        std::vector<Embedding> rows;
        std::vector<FactEntry> facts;
        for (std::size_t i = 0; i < n; ++i) {
            Embedding v(8, 0.0f);
            v[rng() % 8] = 1.0f;
            if (rng() % 2) v[rng() % 8] += 1.0f;
            rows.push_back(v);
            facts.push_back(fact(1, i, "f" + std::to_string(i), v));
        }
        bank.append_step({facts, {}});
        HashEmbedder unused;
        MemoryIndex index = build_index(bank, unused);
        Embedding q(8, 0.0f);
        q[rng() % 8] = 1.0f;
        const std::size_t k = 1 + rng() % 12;
        auto hits = index.top_k(q, k);
        auto expected = oracle::top_k_rows(rows, q, k);
        REQUIRE(hits.size() == expected.size());
        for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits[i].entry_id == facts[expected[i]].entry_id);
    }
}

TEST_CASE("retrieval result json round trip") {
    HashEmbedder unused;
    MemoryIndex index = build_index(small_bank(), unused);
    RetrievalResult r = index.retrieve_vector(axis(4, 2), 2);
    Json j = r;
    RetrievalResult back = j.get<RetrievalResult>();
    CHECK(back.rendered_context == r.rendered_context);
    CHECK(back.expanded_fact_ids == r.expanded_fact_ids);
    REQUIRE(back.primary_hits.size() == 2);
    CHECK(back.primary_hits[0].kind == EntryKind::Insight);
}

TEST_SUITE_END();
