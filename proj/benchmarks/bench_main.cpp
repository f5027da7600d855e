#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "dualmem/chunker/chunker.hpp"
#include "dualmem/core/memory_bank.hpp"
#include "dualmem/evaluation/metrics.hpp"
#include "dualmem/gateway/embedder.hpp"
#include "dualmem/retrieval/retrieval.hpp"

using namespace dualmem;

namespace {

const std::vector<std::string>& words() {
    static const std::vector<std::string> w{"harbor", "boat",  "father", "startup", "Shanghai", "offer",
                                            "coast",  "sister", "moved",  "job",     "torn",     "weekend",
                                            "music",  "rain",   "letter", "garden",  "train",    "promise"};
    return w;
}

std::string sentence(std::mt19937_64& rng, std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += words()[rng() % words().size()];
    }
    return s + ".";
}

Conversation conversation(std::size_t turns) {
    std::mt19937_64 rng(7);
    Conversation c{"bench", {}, Json::object()};
    for (std::size_t i = 0; i < turns; ++i) {
        c.turns.push_back({i % 2 == 0 ? Speaker::User : Speaker::Assistant, sentence(rng, 5 + rng() % 30), i});
    }
    return c;
}

MemoryBank bank(std::size_t n_facts, HashEmbedder& embedder) {
    std::mt19937_64 rng(11);
    MemoryBank b(1, "bench", BankMode::Dual);
    const std::size_t per_step = 8;
    for (std::size_t s = 1; s * per_step <= n_facts; ++s) {
        StepDelta d;
        for (std::size_t i = 0; i < per_step; ++i) {
            std::string text = sentence(rng, 6);
            d.facts.push_back({make_entry_id("bench", s, EntryKind::Fact, i), text, s, make_chunk_id("bench", s),
                               embedder.embed(text)});
        }
        std::string text = sentence(rng, 10);
        d.insights.push_back({make_entry_id("bench", s, EntryKind::Insight, 0), text, s,
                              {d.facts[0].entry_id, d.facts[1].entry_id}, embedder.embed(text)});
        b.append_step(std::move(d));
    }
    return b;
}

void BM_TokenCount(benchmark::State& state) {
    HeuristicTokenizer tok;
    std::mt19937_64 rng(3);
    const std::string text = sentence(rng, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(tok.count(text));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_TokenCount)->Arg(16)->Arg(256)->Arg(4096);

void BM_Partition(benchmark::State& state) {
    HeuristicTokenizer tok;
    const Conversation c = conversation(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(partition(c, 512, tok));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * c.turns.size()));
}
BENCHMARK(BM_Partition)->Arg(100)->Arg(1000)->Arg(10000);

void BM_BuildIndex(benchmark::State& state) {
    HashEmbedder embedder;
    const MemoryBank b = bank(static_cast<std::size_t>(state.range(0)), embedder);
    for (auto _ : state) benchmark::DoNotOptimize(build_index(b, embedder));
}
BENCHMARK(BM_BuildIndex)->Arg(64)->Arg(1024);

void BM_TopK(benchmark::State& state) {
    HashEmbedder embedder;
    const MemoryBank b = bank(static_cast<std::size_t>(state.range(0)), embedder);
    const MemoryIndex index = build_index(b, embedder);
    const Embedding q = embedder.embed("Should I take the job or keep the boat?");
    for (auto _ : state) benchmark::DoNotOptimize(index.retrieve_vector(q, 10));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * index.rows()));
}
BENCHMARK(BM_TopK)->Arg(64)->Arg(1024)->Arg(16384);

void BM_RecallVectors(benchmark::State& state) {
    HashEmbedder embedder;
    std::mt19937_64 rng(5);
    std::vector<Embedding> gt;
    std::vector<Embedding> retrieved;
    for (int i = 0; i < 4; ++i) gt.push_back(embedder.embed(sentence(rng, 8)));
    for (int i = 0; i < state.range(0); ++i) retrieved.push_back(embedder.embed(sentence(rng, 8)));
    const RecallConfig cfg{static_cast<std::size_t>(state.range(0)), 0.7};
    for (auto _ : state) benchmark::DoNotOptimize(recall_detail_vectors(gt, retrieved, cfg));
}
BENCHMARK(BM_RecallVectors)->Arg(10)->Arg(100);

void BM_GroupAdvantage(benchmark::State& state) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> rewards(static_cast<std::size_t>(state.range(0)));
    for (auto& r : rewards) r = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(group_advantage(rewards));
}
BENCHMARK(BM_GroupAdvantage)->Arg(8)->Arg(64);

void BM_HashEmbed(benchmark::State& state) {
    HashEmbedder embedder;
    std::mt19937_64 rng(13);
    const std::string text = sentence(rng, 20);
    for (auto _ : state) benchmark::DoNotOptimize(embedder.embed(text));
}
BENCHMARK(BM_HashEmbed);

}  // namespace

BENCHMARK_MAIN();
