#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dualmem/core/memory_bank.hpp"
#include "dualmem/gateway/embedder.hpp"

namespace dualmem {

inline constexpr std::size_t kDefaultRetrievalK = 10;

struct IndexedEntry {
    std::string entry_id;
    EntryKind kind = EntryKind::Fact;
    std::string text;
    std::vector<std::string> linked_fact_ids;
};

struct ScoredHit {
    std::string entry_id;
    EntryKind kind = EntryKind::Fact;
    std::string text;
    double score = 0.0;
};

struct RetrievalResult {
    std::vector<ScoredHit> primary_hits;
    std::vector<std::string> expanded_fact_ids;
    std::string rendered_context;

    bool empty() const noexcept { return primary_hits.empty() && expanded_fact_ids.empty(); }
};

// `[FACT] <id>: <text>` / `[INSIGHT] <id>: <text>`
std::string render_entry_line(EntryKind kind, std::string_view entry_id, std::string_view text);

// Exhaustive-scan cosine index over the retrievable entries of one bank.
// Rows follow bank order (facts, then insights); an InsightOnly bank indexes
// insights only but keeps every fact available for link expansion.
class MemoryIndex {
public:
    MemoryIndex() = default;

    std::size_t rows() const noexcept { return entries_.size(); }
    std::size_t dimension() const noexcept { return dim_; }
    const std::vector<IndexedEntry>& entries() const noexcept { return entries_; }
    std::span<const float> row(std::size_t i) const;
    const std::vector<float>& matrix() const noexcept { return matrix_; }

    // Top-k rows by score, descending; equal scores keep row order.
    std::vector<ScoredHit> top_k(std::span<const float> query, std::size_t k) const;

    // top_k plus insight -> fact expansion and the rendered context.
    RetrievalResult retrieve_vector(std::span<const float> query, std::size_t k) const;

private:
    friend MemoryIndex build_index(const MemoryBank& bank, Embedder& embedder);

    std::vector<IndexedEntry> entries_;
    std::vector<float> matrix_;
    std::size_t dim_ = 0;
    std::unordered_map<std::string, std::string> fact_text_;
};

// Entries without a stored embedding are embedded here; the bank is not
// modified. Rows are L2-normalized.
MemoryIndex build_index(const MemoryBank& bank, Embedder& embedder);

// Throws InvalidConfig for k == 0. An empty index yields an empty result
// without embedding the query.
RetrievalResult retrieve(const MemoryIndex& index, const std::string& query_text, std::size_t k,
                         Embedder& embedder);

void to_json(Json& j, const ScoredHit& hit);
void from_json(const Json& j, ScoredHit& hit);
void to_json(Json& j, const RetrievalResult& r);
void from_json(const Json& j, RetrievalResult& r);

}  // namespace dualmem
