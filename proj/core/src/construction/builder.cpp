#include "dualmem/construction/builder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "dualmem/construction/output_parsing.hpp"
#include "dualmem/error.hpp"
#include "dualmem/gateway/structured_chat.hpp"
#include "dualmem/retrieval/retrieval.hpp"
#include "dualmem/retrieval/vector_ops.hpp"

namespace dualmem {

namespace {

constexpr std::string_view kFactFormat = "a JSON array of strings, one fact per element ([] if there are none)";
constexpr std::string_view kInsightFormat =
    R"(a JSON array of {"text": "...", "fact_ids": ["..."]} objects, or null if no insight is warranted)";

// Similarity scores are compared at 1e-9 resolution, so rounding noise
// between equal cosines cannot outrank the older-entry tie break.
constexpr double kSimilarityResolution = 1e9;

}  // namespace

void BuildConfig::validate() const {
    if (chunk_budget < 1) fail(ErrorCode::InvalidConfig, "chunk_budget must be >= 1");
    if (prior_view_budget < 1) fail(ErrorCode::InvalidConfig, "prior_view_budget must be >= 1");
    if (max_facts_per_chunk < 1) fail(ErrorCode::InvalidConfig, "max_facts_per_chunk must be >= 1");
    if (max_insights_per_chunk < 1) fail(ErrorCode::InvalidConfig, "max_insights_per_chunk must be >= 1");
    if (!(memory_params.temperature >= 0.0)) fail(ErrorCode::InvalidConfig, "temperature must be >= 0");
}

void to_json(Json& j, const BuildConfig& c) {
    j = Json{{"mode", to_string(c.mode)},
             {"chunk_budget", c.chunk_budget},
             {"prior_view_budget", c.prior_view_budget},
             {"prior_view_top_n", c.prior_view_top_n},
             {"max_facts_per_chunk", c.max_facts_per_chunk},
             {"max_insights_per_chunk", c.max_insights_per_chunk},
             {"memory_temperature", c.memory_params.temperature},
             {"memory_max_tokens", c.memory_params.max_tokens}};
}

void to_json(Json& j, const LinkViolation& v) {
    j = Json{{"step_index", v.step_index}, {"insight_text", v.insight_text}, {"fact_id", v.fact_id}};
}

void from_json(const Json& j, LinkViolation& v) {
    v.step_index = j.at("step_index").get<std::size_t>();
    v.insight_text = j.at("insight_text").get<std::string>();
    v.fact_id = j.at("fact_id").get<std::string>();
}

void to_json(Json& j, const StepTrace& s) {
    j = Json{{"step_index", s.step_index},
             {"chunk_id", s.chunk_id},
             {"prompt_fingerprints", s.prompt_fingerprints},
             {"facts", s.facts},
             {"insights", s.insights},
             {"prior_view_ids", s.prior_view_ids}};
}

void from_json(const Json& j, StepTrace& s) {
    s.step_index = j.at("step_index").get<std::size_t>();
    s.chunk_id = j.at("chunk_id").get<std::string>();
    s.prompt_fingerprints = j.at("prompt_fingerprints").get<std::vector<std::string>>();
    s.facts = j.at("facts").get<std::vector<std::string>>();
    s.insights = j.at("insights").get<std::vector<std::string>>();
    s.prior_view_ids = j.at("prior_view_ids").get<std::vector<std::string>>();
}

void to_json(Json& j, const BuildTrace& t) {
    j = Json{{"steps", t.steps}, {"violations", t.violations}};
}

void from_json(const Json& j, BuildTrace& t) {
    t.steps = j.at("steps").get<std::vector<StepTrace>>();
    t.violations = j.at("violations").get<std::vector<LinkViolation>>();
}

MemoryConstructor::MemoryConstructor(Gateway& gateway, Embedder& embedder, BuildConfig config,
                                     const PromptLibrary& prompts, const Tokenizer* tokenizer)
    : gateway_(gateway),
      embedder_(embedder),
      config_(std::move(config)),
      prompts_(prompts),
      tokenizer_(tokenizer ? *tokenizer : default_tokenizer_) {
    config_.validate();
}

std::vector<FactEntry> MemoryConstructor::extract_facts(const Chunk& chunk, const Persona& persona,
                                                        StepTrace* trace) const {
    if (chunk.turns.empty()) fail(ErrorCode::InvalidConfig, "chunk '" + chunk.chunk_id + "' has no turns");

    ChatRequest request;
    request.role_tag = RoleTag::MemoryModel;
    request.params = config_.memory_params;
    request.messages = prompts_.get("fact_extraction")
                           .render({{"persona", persona_text(persona)}, {"chunk", render_turns(chunk.turns)}});

    auto texts = chat_structured<std::vector<std::string>>(
        gateway_, std::move(request), prompts_, kFactFormat,
        [](std::string_view reply) -> ParseOutcome<std::vector<std::string>> {
            if (auto facts = parse_fact_list(reply)) return *facts;
            return ParseFailure{ErrorCode::MalformedModelOutput, "fact extraction reply is not a fact list"};
        },
        trace ? &trace->prompt_fingerprints : nullptr);

    if (texts.size() > config_.max_facts_per_chunk) {
        spdlog::debug("step {}: truncating {} facts to {}", chunk.step_index, texts.size(),
                      config_.max_facts_per_chunk);
        texts.resize(config_.max_facts_per_chunk);
    }

    std::vector<FactEntry> facts;
    facts.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        FactEntry f;
        f.entry_id = make_entry_id(chunk.conversation_id, chunk.step_index, EntryKind::Fact, i);
        f.text = std::move(texts[i]);
        f.step_index = chunk.step_index;
        f.source_chunk_id = chunk.chunk_id;
        facts.push_back(std::move(f));
    }
    return facts;
}

PriorMemoryView MemoryConstructor::render_prior_view(const MemoryBank& bank,
                                                     const std::vector<FactEntry>& new_facts) const {
    const std::vector<EntryRef> chron = bank.chronological();
    if (chron.empty()) return {};

    const std::size_t top_n = config_.prior_view_top_n;
    std::set<std::size_t> selected;
    for (std::size_t i = chron.size() - std::min(top_n, chron.size()); i < chron.size(); ++i) selected.insert(i);

    // Mean of the new facts' embeddings.
    std::vector<double> mean;
    std::size_t n_embedded = 0;
    for (const auto& f : new_facts) {
        if (!f.embedding) continue;
        if (mean.empty()) mean.assign(f.embedding->size(), 0.0);
        if (f.embedding->size() != mean.size()) fail(ErrorCode::DimensionMismatch, "new facts have mixed dimensions");
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += (*f.embedding)[d];
        ++n_embedded;
    }
    bool mean_nonzero = std::any_of(mean.begin(), mean.end(), [](double x) { return x != 0.0; });
    if (top_n > 0 && n_embedded > 0 && mean_nonzero) {
        Embedding centroid(mean.size());
        for (std::size_t d = 0; d < mean.size(); ++d) centroid[d] = static_cast<float>(mean[d] / n_embedded);

        std::vector<std::pair<double, std::size_t>> scored;
        for (std::size_t i = 0; i < chron.size(); ++i) {
            const auto& emb = bank.embedding_of(chron[i]);
            if (!emb) continue;
            scored.emplace_back(std::round(cosine(*emb, centroid) * kSimilarityResolution), i);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (std::size_t r = 0; r < std::min(top_n, scored.size()); ++r) selected.insert(scored[r].second);
    }

    // Keep the newest entries that fit the token budget.
    std::vector<std::size_t> kept;
    std::size_t tokens = 0;
    for (auto it = selected.rbegin(); it != selected.rend(); ++it) {
        const EntryRef& ref = chron[*it];
        std::size_t cost = tokenizer_.count(render_entry_line(ref.kind, bank.id_of(ref), bank.text_of(ref)));
        if (tokens + cost > config_.prior_view_budget) break;
        tokens += cost;
        kept.push_back(*it);
    }
    std::reverse(kept.begin(), kept.end());

    PriorMemoryView view;
    for (std::size_t pos : kept) {
        const EntryRef& ref = chron[pos];
        if (!view.rendered.empty()) view.rendered += '\n';
        view.rendered += render_entry_line(ref.kind, bank.id_of(ref), bank.text_of(ref));
        view.included_entry_ids.push_back(bank.id_of(ref));
    }
    return view;
}

std::vector<InsightEntry> MemoryConstructor::derive_insights(std::size_t step_index,
                                                             const std::vector<FactEntry>& new_facts,
                                                             const PriorMemoryView& prior, const MemoryBank& bank,
                                                             const Persona& persona, StepTrace* trace,
                                                             std::vector<LinkViolation>* violations) const {
    if (bank.mode() == BankMode::FactOnly) {
        fail(ErrorCode::InvalidConfig, "insight stage is disabled for FactOnly banks");
    }

    std::unordered_set<std::string> allowed;
    std::string facts_block;
    for (const auto& f : new_facts) {
        allowed.insert(f.entry_id);
        if (!facts_block.empty()) facts_block += '\n';
        facts_block += render_entry_line(EntryKind::Fact, f.entry_id, f.text);
    }
    for (const auto& id : prior.included_entry_ids) {
        if (bank.find_fact(id)) allowed.insert(id);
    }

    ChatRequest request;
    request.role_tag = RoleTag::MemoryModel;
    request.params = config_.memory_params;
    request.messages = prompts_.get("insight_derivation")
                           .render({{"persona", persona_text(persona)},
                                    {"facts", facts_block.empty() ? "(none)" : facts_block},
                                    {"prior_memory", prior.rendered.empty() ? "(none)" : prior.rendered}});

    auto raw = chat_structured<std::vector<RawInsight>>(
        gateway_, std::move(request), prompts_, kInsightFormat,
        [](std::string_view reply) -> ParseOutcome<std::vector<RawInsight>> {
            if (auto ins = parse_insight_list(reply)) return *ins;
            return ParseFailure{ErrorCode::MalformedModelOutput, "insight reply is not an insight list or null"};
        },
        trace ? &trace->prompt_fingerprints : nullptr);

    const std::string& conversation_id = bank.conversation_id();
    std::vector<InsightEntry> out;
    for (auto& r : raw) {
        if (out.size() == config_.max_insights_per_chunk) break;
        std::vector<std::string> links;
        std::string dangling;
        bool no_links = r.fact_ids.empty();
        for (auto& id : r.fact_ids) {
            if (!allowed.count(id)) {
                dangling = id;
                break;
            }
            if (std::find(links.begin(), links.end(), id) == links.end()) links.push_back(id);
        }
        if (no_links || !dangling.empty()) {
            spdlog::warn("DanglingLink at step {}: insight dropped ({})", step_index,
                         no_links ? std::string("no grounding facts") : "unknown fact id '" + dangling + "'");
            if (violations) violations->push_back({step_index, r.text, dangling});
            continue;
        }
        InsightEntry ins;
        ins.entry_id = make_entry_id(conversation_id, step_index, EntryKind::Insight, out.size());
        ins.text = std::move(r.text);
        ins.step_index = step_index;
        ins.linked_fact_ids = std::move(links);
        out.push_back(std::move(ins));
    }
    return out;
}

void MemoryConstructor::embed_entries(std::vector<FactEntry>& facts) const {
    if (facts.empty()) return;
    std::vector<std::string> texts;
    for (const auto& f : facts) texts.push_back(f.text);
    auto vectors = embedder_.embed_batch(texts);
    for (std::size_t i = 0; i < facts.size(); ++i) facts[i].embedding = std::move(vectors[i]);
}

void MemoryConstructor::embed_entries(std::vector<InsightEntry>& insights) const {
    if (insights.empty()) return;
    std::vector<std::string> texts;
    for (const auto& ins : insights) texts.push_back(ins.text);
    auto vectors = embedder_.embed_batch(texts);
    for (std::size_t i = 0; i < insights.size(); ++i) insights[i].embedding = std::move(vectors[i]);
}

BuildResult MemoryConstructor::build(const Conversation& conversation, const Persona& persona) const {
    validate_conversation(conversation);
    const std::vector<Chunk> chunks = partition(conversation, config_.chunk_budget, tokenizer_);

    BuildResult result{MemoryBank(persona.id, conversation.id, config_.mode), {}};
    for (const Chunk& chunk : chunks) {
        StepTrace step;
        step.step_index = chunk.step_index;
        step.chunk_id = chunk.chunk_id;
        try {
            std::vector<FactEntry> facts = extract_facts(chunk, persona, &step);
            embed_entries(facts);

            std::vector<InsightEntry> insights;
            if (config_.mode != BankMode::FactOnly && !facts.empty()) {
                PriorMemoryView view = render_prior_view(result.bank, facts);
                step.prior_view_ids = view.included_entry_ids;
                insights = derive_insights(chunk.step_index, facts, view, result.bank, persona, &step,
                                           &result.trace.violations);
                embed_entries(insights);
            }

            for (const auto& f : facts) step.facts.push_back(f.text);
            for (const auto& i : insights) step.insights.push_back(i.text);
            result.bank.append_step({std::move(facts), std::move(insights)});
        } catch (const Error& e) {
            throw e.with_context("step " + std::to_string(chunk.step_index) + " (" + chunk.chunk_id + ")");
        }
        result.trace.steps.push_back(std::move(step));
    }
    return result;
}

BuildResult build_memory(const Conversation& conversation, const Persona& persona, const BuildConfig& config,
                         Gateway& gateway, Embedder& embedder, const PromptLibrary& prompts) {
    MemoryConstructor constructor(gateway, embedder, config, prompts);
    return constructor.build(conversation, persona);
}

}  // namespace dualmem
