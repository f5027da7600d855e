#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dualmem/chunker/chunker.hpp"
#include "dualmem/core/memory_bank.hpp"
#include "dualmem/gateway/embedder.hpp"
#include "dualmem/gateway/gateway.hpp"
#include "dualmem/prompts/prompt_library.hpp"

namespace dualmem {

struct BuildConfig {
    BankMode mode = BankMode::Dual;
    std::size_t chunk_budget = kDefaultChunkTokens;
    std::size_t prior_view_budget = 1024;
    std::size_t prior_view_top_n = 10;
    std::size_t max_facts_per_chunk = 8;
    std::size_t max_insights_per_chunk = 4;
    ChatParams memory_params = default_params(RoleTag::MemoryModel);

    // Throws InvalidConfig.
    void validate() const;
};

void to_json(Json& j, const BuildConfig& c);

// The slice of earlier memory shown to the insight stage.
struct PriorMemoryView {
    std::string rendered;
    std::vector<std::string> included_entry_ids;
};

// An insight dropped because it cited a fact outside the new facts and the
// rendered prior view (or cited none).
struct LinkViolation {
    std::size_t step_index = 0;
    std::string insight_text;
    std::string fact_id;  // empty when the insight cited no facts
};

struct StepTrace {
    std::size_t step_index = 0;
    std::string chunk_id;
    std::vector<std::string> prompt_fingerprints;
    std::vector<std::string> facts;
    std::vector<std::string> insights;
    std::vector<std::string> prior_view_ids;
};

struct BuildTrace {
    std::vector<StepTrace> steps;
    std::vector<LinkViolation> violations;
};

void to_json(Json& j, const LinkViolation& v);
void from_json(const Json& j, LinkViolation& v);
void to_json(Json& j, const StepTrace& s);
void from_json(const Json& j, StepTrace& s);
void to_json(Json& j, const BuildTrace& t);
void from_json(const Json& j, BuildTrace& t);

struct BuildResult {
    MemoryBank bank;
    BuildTrace trace;
};

// Builds a memory bank chunk by chunk. At step i the memory model sees chunk
// C_i and the persona and emits facts F_i; it then sees F_i, a rendered view of
// the bank so far and the persona, and emits insights I_i linked to their
// grounding facts. {F_i, I_i} is committed as one bank step.
class MemoryConstructor {
public:
    MemoryConstructor(Gateway& gateway, Embedder& embedder, BuildConfig config,
                      const PromptLibrary& prompts = PromptLibrary::defaults(),
                      const Tokenizer* tokenizer = nullptr);

    MemoryConstructor(const MemoryConstructor&) = delete;
    MemoryConstructor& operator=(const MemoryConstructor&) = delete;

    const BuildConfig& config() const noexcept { return config_; }

    // At most max_facts_per_chunk entries, ids `{conv}:{step}:fact:{n}`. An
    // empty result is valid. Throws MalformedModelOutput after one reformat
    // retry.
    std::vector<FactEntry> extract_facts(const Chunk& chunk, const Persona& persona,
                                         StepTrace* trace = nullptr) const;

    // Recency ∪ similarity selection over the bank:
    //   - the prior_view_top_n most recent entries, and
    //   - the prior_view_top_n entries closest (cosine) to the mean embedding
    //     of `new_facts`, ties to the older entry;
    // rendered oldest-first and trimmed from the oldest end until the text
    // fits in prior_view_budget tokens.
    PriorMemoryView render_prior_view(const MemoryBank& bank, const std::vector<FactEntry>& new_facts) const;

    // Links may point at `new_facts` or at facts included in `prior`. Insights
    // citing anything else (or nothing) are dropped and reported through
    // `violations`. A null reply yields no insights.
    std::vector<InsightEntry> derive_insights(std::size_t step_index, const std::vector<FactEntry>& new_facts,
                                              const PriorMemoryView& prior, const MemoryBank& bank,
                                              const Persona& persona, StepTrace* trace = nullptr,
                                              std::vector<LinkViolation>* violations = nullptr) const;

    // Runs every chunk in order. FactOnly skips the insight stage; the insight
    // stage is also skipped for steps that produced no facts. Stage errors are
    // rethrown with the step attached.
    BuildResult build(const Conversation& conversation, const Persona& persona) const;

private:
    void embed_entries(std::vector<FactEntry>& facts) const;
    void embed_entries(std::vector<InsightEntry>& insights) const;

    Gateway& gateway_;
    Embedder& embedder_;
    BuildConfig config_;
    const PromptLibrary& prompts_;
    HeuristicTokenizer default_tokenizer_;
    const Tokenizer& tokenizer_;
};

// Convenience wrapper over MemoryConstructor::build.
BuildResult build_memory(const Conversation& conversation, const Persona& persona, const BuildConfig& config,
                         Gateway& gateway, Embedder& embedder,
                         const PromptLibrary& prompts = PromptLibrary::defaults());

}  // namespace dualmem
