#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dualmem/core/types.hpp"

namespace dualmem {

enum class BankMode { Dual, FactOnly, InsightOnly };

std::string_view to_string(BankMode mode);
BankMode bank_mode_from_string(std::string_view name);

// Entries produced by one construction step.
struct StepDelta {
    std::vector<FactEntry> facts;
    std::vector<InsightEntry> insights;
};

// Lightweight pointer into a bank's entry lists.
struct EntryRef {
    EntryKind kind;
    std::size_t position;  // index into facts() or insights()
};

// The append-only union of step-wise cognition for one conversation.
//
// A step is committed atomically through append_step(); nothing already in the
// bank is mutated afterwards. Insight links must resolve to facts that are in the
// bank (or in the same step) when the insight is inserted. FactOnly banks never
// hold insights. InsightOnly banks keep their facts so links resolve, but
// is_retrievable() hides them from the index.
class MemoryBank {
public:
    MemoryBank() = default;
    MemoryBank(std::int64_t persona_id, std::string conversation_id, BankMode mode);

    std::int64_t persona_id() const noexcept { return persona_id_; }
    const std::string& conversation_id() const noexcept { return conversation_id_; }
    BankMode mode() const noexcept { return mode_; }
    std::size_t step_count() const noexcept { return step_count_; }
    const std::vector<FactEntry>& facts() const noexcept { return facts_; }
    const std::vector<InsightEntry>& insights() const noexcept { return insights_; }
    std::size_t size() const noexcept { return facts_.size() + insights_.size(); }
    bool empty() const noexcept { return size() == 0; }

    // Commits step step_count()+1. Throws UnknownLink for unresolved or empty
    // links, SchemaViolation for malformed entries, InvalidConfig for insights
    // in a FactOnly bank. The bank is unchanged when this throws.
    void append_step(StepDelta delta);

    const FactEntry* find_fact(std::string_view entry_id) const;
    const InsightEntry* find_insight(std::string_view entry_id) const;

    bool is_retrievable(EntryKind kind) const noexcept;

    // Every entry in insertion order: by step, facts before insights.
    std::vector<EntryRef> chronological() const;

    const std::string& text_of(const EntryRef& ref) const;
    const std::string& id_of(const EntryRef& ref) const;
    const std::optional<Embedding>& embedding_of(const EntryRef& ref) const;

    // O(facts + insights) scan of ids, step ordering and link causality.
    // Throws SchemaViolation or UnknownLink on the first violation.
    void check_integrity() const;

    Json extra = Json::object();

private:
    std::int64_t persona_id_ = 0;
    std::string conversation_id_;
    BankMode mode_ = BankMode::Dual;
    std::size_t step_count_ = 0;
    std::vector<FactEntry> facts_;
    std::vector<InsightEntry> insights_;
    std::unordered_map<std::string, std::size_t> fact_pos_;
    std::unordered_map<std::string, std::size_t> insight_pos_;

    friend void from_json(const Json& j, MemoryBank& bank);
};

void to_json(Json& j, const MemoryBank& bank);
void from_json(const Json& j, MemoryBank& bank);

// Canonical on-disk form: one pretty-printed JSON document.
std::string serialize_bank(const MemoryBank& bank);
MemoryBank parse_bank(std::string_view text);
MemoryBank load_bank(const std::string& path);
void save_bank(const MemoryBank& bank, const std::string& path);

}  // namespace dualmem
