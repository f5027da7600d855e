#include "dualmem/retrieval/retrieval.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "dualmem/error.hpp"
#include "dualmem/gateway/gateway.hpp"
#include "dualmem/retrieval/vector_ops.hpp"

namespace dualmem {

std::string render_entry_line(EntryKind kind, std::string_view entry_id, std::string_view text) {
    std::string line = kind == EntryKind::Fact ? "[FACT] " : "[INSIGHT] ";
    line += entry_id;
    line += ": ";
    line += text;
    return line;
}

std::span<const float> MemoryIndex::row(std::size_t i) const {
    return {matrix_.data() + i * dim_, dim_};
}

MemoryIndex build_index(const MemoryBank& bank, Embedder& embedder) {
    MemoryIndex index;
    std::vector<Embedding> vectors;
    std::vector<std::size_t> missing;
    std::vector<std::string> missing_texts;

    auto add = [&](IndexedEntry entry, const std::optional<Embedding>& emb) {
        if (emb) {
            vectors.push_back(*emb);
        } else {
            missing.push_back(vectors.size());
            missing_texts.push_back(entry.text);
            vectors.emplace_back();
        }
        index.entries_.push_back(std::move(entry));
    };

    for (const auto& f : bank.facts()) {
        index.fact_text_.emplace(f.entry_id, f.text);
        if (bank.is_retrievable(EntryKind::Fact)) add({f.entry_id, EntryKind::Fact, f.text, {}}, f.embedding);
    }
    if (bank.is_retrievable(EntryKind::Insight)) {
        for (const auto& ins : bank.insights()) {
            add({ins.entry_id, EntryKind::Insight, ins.text, ins.linked_fact_ids}, ins.embedding);
        }
    }

    if (!missing.empty()) {
        auto fresh = embedder.embed_batch(missing_texts);
        for (std::size_t i = 0; i < missing.size(); ++i) vectors[missing[i]] = std::move(fresh[i]);
    }

    if (vectors.empty()) return index;
    index.dim_ = vectors.front().size();
    index.matrix_.reserve(vectors.size() * index.dim_);
    for (auto& v : vectors) {
        if (v.size() != index.dim_) {
            fail(ErrorCode::DimensionMismatch, "entry embeddings have mixed dimensions (" + std::to_string(v.size()) +
                                                   " vs " + std::to_string(index.dim_) + ")");
        }
        normalize(v);
        index.matrix_.insert(index.matrix_.end(), v.begin(), v.end());
    }
    return index;
}

std::vector<ScoredHit> MemoryIndex::top_k(std::span<const float> query, std::size_t k) const {
    if (k == 0) fail(ErrorCode::InvalidConfig, "k must be >= 1");
    if (entries_.empty()) return {};
    if (query.size() != dim_) {
        fail(ErrorCode::DimensionMismatch, "query has dimension " + std::to_string(query.size()) + ", index " +
                                               std::to_string(dim_));
    }
    std::vector<double> scores(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) scores[i] = dot(row(i), query);

    std::vector<std::size_t> order(entries_.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;
                      });

    std::vector<ScoredHit> hits;
    hits.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        const auto& e = entries_[order[i]];
        hits.push_back({e.entry_id, e.kind, e.text, scores[order[i]]});
    }
    return hits;
}

RetrievalResult MemoryIndex::retrieve_vector(std::span<const float> query, std::size_t k) const {
    RetrievalResult result;
    result.primary_hits = top_k(query, k);

    std::unordered_set<std::string> seen;
    for (const auto& h : result.primary_hits) seen.insert(h.entry_id);

    std::unordered_map<std::string, const IndexedEntry*> by_id;
    for (const auto& e : entries_) by_id.emplace(e.entry_id, &e);

    std::string context;
    auto append_line = [&](const std::string& line) {
        if (!context.empty()) context += '\n';
        context += line;
    };
    for (const auto& h : result.primary_hits) {
        append_line(render_entry_line(h.kind, h.entry_id, h.text));
        if (h.kind != EntryKind::Insight) continue;
        for (const auto& link : by_id.at(h.entry_id)->linked_fact_ids) {
            if (seen.insert(link).second) result.expanded_fact_ids.push_back(link);
        }
    }
    for (const auto& id : result.expanded_fact_ids) {
        auto it = fact_text_.find(id);
        if (it == fact_text_.end()) fail(ErrorCode::UnknownLink, "insight links unknown fact '" + id + "'");
        append_line(render_entry_line(EntryKind::Fact, id, it->second));
    }
    result.rendered_context = std::move(context);
    return result;
}

RetrievalResult retrieve(const MemoryIndex& index, const std::string& query_text, std::size_t k,
                         Embedder& embedder) {
    if (k == 0) fail(ErrorCode::InvalidConfig, "k must be >= 1");
    if (index.rows() == 0) return {};
    Embedding q = embedder.embed(query_text);
    return index.retrieve_vector(q, k);
}

void to_json(Json& j, const ScoredHit& hit) {
    j = Json{{"entry_id", hit.entry_id}, {"kind", to_string(hit.kind)}, {"text", hit.text}, {"score", hit.score}};
}

void from_json(const Json& j, ScoredHit& hit) {
    hit.entry_id = j.at("entry_id").get<std::string>();
    std::string kind = j.at("kind").get<std::string>();
    if (kind != "fact" && kind != "insight") fail(ErrorCode::SchemaViolation, "unknown hit kind '" + kind + "'");
    hit.kind = kind == "fact" ? EntryKind::Fact : EntryKind::Insight;
    hit.text = j.at("text").get<std::string>();
    hit.score = j.at("score").get<double>();
}

void to_json(Json& j, const RetrievalResult& r) {
    j = Json{{"primary_hits", r.primary_hits},
             {"expanded_fact_ids", r.expanded_fact_ids},
             {"rendered_context", r.rendered_context}};
}

void from_json(const Json& j, RetrievalResult& r) {
    r.primary_hits = j.at("primary_hits").get<std::vector<ScoredHit>>();
    r.expanded_fact_ids = j.at("expanded_fact_ids").get<std::vector<std::string>>();
    r.rendered_context = j.at("rendered_context").get<std::string>();
}

}  // namespace dualmem
