#include "dualmem/core/memory_bank.hpp"

#include <unordered_set>

#include "dualmem/error.hpp"
#include "dualmem/util/io.hpp"
#include "../json_fields.hpp"

namespace dualmem {

std::string_view to_string(BankMode mode) {
    switch (mode) {
        case BankMode::Dual: return "Dual";
        case BankMode::FactOnly: return "FactOnly";
        case BankMode::InsightOnly: return "InsightOnly";
    }
    return "Dual";
}

BankMode bank_mode_from_string(std::string_view name) {
    if (name == "Dual" || name == "dual") return BankMode::Dual;
    if (name == "FactOnly" || name == "fact-only") return BankMode::FactOnly;
    if (name == "InsightOnly" || name == "insight-only") return BankMode::InsightOnly;
    fail(ErrorCode::InvalidConfig, "unknown memory mode '" + std::string(name) + "'");
}

MemoryBank::MemoryBank(std::int64_t persona_id, std::string conversation_id, BankMode mode)
    : persona_id_(persona_id), conversation_id_(std::move(conversation_id)), mode_(mode) {}

void MemoryBank::append_step(StepDelta delta) {
    const std::size_t step = step_count_ + 1;
    const std::string where = "step " + std::to_string(step);

    if (mode_ == BankMode::FactOnly && !delta.insights.empty()) {
        fail(ErrorCode::InvalidConfig, where + ": FactOnly bank cannot hold insights");
    }

    std::unordered_set<std::string> new_ids;
    std::unordered_set<std::string> new_fact_ids;
    auto admit_id = [&](const std::string& id) {
        if (id.empty()) fail(ErrorCode::SchemaViolation, where + ": empty entry_id");
        if (fact_pos_.count(id) || insight_pos_.count(id) || !new_ids.insert(id).second) {
            fail(ErrorCode::SchemaViolation, where + ": duplicate entry_id '" + id + "'");
        }
    };

    for (const auto& f : delta.facts) {
        admit_id(f.entry_id);
        if (f.text.empty()) fail(ErrorCode::SchemaViolation, where + ": fact '" + f.entry_id + "' has empty text");
        if (f.step_index != step) {
            fail(ErrorCode::SchemaViolation, where + ": fact '" + f.entry_id + "' carries step_index " +
                                                 std::to_string(f.step_index));
        }
        new_fact_ids.insert(f.entry_id);
    }
    for (const auto& ins : delta.insights) {
        admit_id(ins.entry_id);
        if (ins.text.empty()) {
            fail(ErrorCode::SchemaViolation, where + ": insight '" + ins.entry_id + "' has empty text");
        }
        if (ins.step_index != step) {
            fail(ErrorCode::SchemaViolation, where + ": insight '" + ins.entry_id + "' carries step_index " +
                                                 std::to_string(ins.step_index));
        }
        if (ins.linked_fact_ids.empty()) {
            fail(ErrorCode::UnknownLink, where + ": insight '" + ins.entry_id + "' has no grounding facts");
        }
        for (const auto& link : ins.linked_fact_ids) {
            if (!fact_pos_.count(link) && !new_fact_ids.count(link)) {
                fail(ErrorCode::UnknownLink, where + ": insight '" + ins.entry_id + "' links unknown fact '" +
                                                 link + "'");
            }
        }
    }

    // All checks passed; commit.
    for (auto& f : delta.facts) {
        fact_pos_.emplace(f.entry_id, facts_.size());
        facts_.push_back(std::move(f));
    }
    for (auto& ins : delta.insights) {
        insight_pos_.emplace(ins.entry_id, insights_.size());
        insights_.push_back(std::move(ins));
    }
    step_count_ = step;
}

const FactEntry* MemoryBank::find_fact(std::string_view entry_id) const {
    auto it = fact_pos_.find(std::string(entry_id));
    return it == fact_pos_.end() ? nullptr : &facts_[it->second];
}

const InsightEntry* MemoryBank::find_insight(std::string_view entry_id) const {
    auto it = insight_pos_.find(std::string(entry_id));
    return it == insight_pos_.end() ? nullptr : &insights_[it->second];
}

bool MemoryBank::is_retrievable(EntryKind kind) const noexcept {
    if (kind == EntryKind::Fact) return mode_ != BankMode::InsightOnly;
    return mode_ != BankMode::FactOnly;
}

std::vector<EntryRef> MemoryBank::chronological() const {
    std::vector<EntryRef> out;
    out.reserve(size());
    std::size_t fi = 0;
    std::size_t ii = 0;
    while (fi < facts_.size() || ii < insights_.size()) {
        bool take_fact = ii >= insights_.size() ||
                         (fi < facts_.size() && facts_[fi].step_index <= insights_[ii].step_index);
        if (take_fact) {
            out.push_back({EntryKind::Fact, fi++});
        } else {
            out.push_back({EntryKind::Insight, ii++});
        }
    }
    return out;
}

const std::string& MemoryBank::text_of(const EntryRef& ref) const {
    return ref.kind == EntryKind::Fact ? facts_[ref.position].text : insights_[ref.position].text;
}

const std::string& MemoryBank::id_of(const EntryRef& ref) const {
    return ref.kind == EntryKind::Fact ? facts_[ref.position].entry_id : insights_[ref.position].entry_id;
}

const std::optional<Embedding>& MemoryBank::embedding_of(const EntryRef& ref) const {
    return ref.kind == EntryKind::Fact ? facts_[ref.position].embedding : insights_[ref.position].embedding;
}

void MemoryBank::check_integrity() const {
    std::unordered_map<std::string_view, std::size_t> fact_steps;
    fact_steps.reserve(facts_.size());
    std::unordered_set<std::string_view> ids;
    ids.reserve(size());

    std::size_t last_step = 0;
    for (const auto& f : facts_) {
        if (f.text.empty()) fail(ErrorCode::SchemaViolation, "fact '" + f.entry_id + "' has empty text");
        if (f.step_index < 1 || f.step_index > step_count_ || f.step_index < last_step) {
            fail(ErrorCode::SchemaViolation, "fact '" + f.entry_id + "' is out of step order");
        }
        last_step = f.step_index;
        if (!ids.insert(f.entry_id).second) fail(ErrorCode::SchemaViolation, "duplicate entry_id '" + f.entry_id + "'");
        fact_steps.emplace(f.entry_id, f.step_index);
    }

    if (mode_ == BankMode::FactOnly && !insights_.empty()) {
        fail(ErrorCode::SchemaViolation, "FactOnly bank holds insights");
    }

    last_step = 0;
    for (const auto& ins : insights_) {
        if (ins.text.empty()) fail(ErrorCode::SchemaViolation, "insight '" + ins.entry_id + "' has empty text");
        if (ins.step_index < 1 || ins.step_index > step_count_ || ins.step_index < last_step) {
            fail(ErrorCode::SchemaViolation, "insight '" + ins.entry_id + "' is out of step order");
        }
        last_step = ins.step_index;
        if (!ids.insert(ins.entry_id).second) {
            fail(ErrorCode::SchemaViolation, "duplicate entry_id '" + ins.entry_id + "'");
        }
        if (ins.linked_fact_ids.empty()) {
            fail(ErrorCode::UnknownLink, "insight '" + ins.entry_id + "' has no grounding facts");
        }
        for (const auto& link : ins.linked_fact_ids) {
            auto it = fact_steps.find(link);
            if (it == fact_steps.end()) {
                fail(ErrorCode::UnknownLink, "insight '" + ins.entry_id + "' links unknown fact '" + link + "'");
            }
            if (it->second > ins.step_index) {
                fail(ErrorCode::UnknownLink, "insight '" + ins.entry_id + "' links later fact '" + link + "'");
            }
        }
    }
}

void to_json(Json& j, const MemoryBank& bank) {
    j = detail::with_extra(bank.extra);
    j["persona_id"] = bank.persona_id();
    j["conversation_id"] = bank.conversation_id();
    j["mode"] = to_string(bank.mode());
    j["facts"] = bank.facts();
    j["insights"] = bank.insights();
    j["step_count"] = bank.step_count();
}

void from_json(const Json& j, MemoryBank& bank) {
    const Json& pid = detail::require(j, "persona_id");
    if (!pid.is_number_integer()) fail(ErrorCode::SchemaViolation, "field 'persona_id' must be an integer");

    MemoryBank out(pid.get<std::int64_t>(), detail::require_string(j, "conversation_id"),
                   bank_mode_from_string(detail::require_string(j, "mode")));
    out.step_count_ = detail::require_index(j, "step_count");
    out.facts_ = detail::require(j, "facts").get<std::vector<FactEntry>>();
    out.insights_ = detail::require(j, "insights").get<std::vector<InsightEntry>>();
    for (std::size_t i = 0; i < out.facts_.size(); ++i) out.fact_pos_.emplace(out.facts_[i].entry_id, i);
    for (std::size_t i = 0; i < out.insights_.size(); ++i) out.insight_pos_.emplace(out.insights_[i].entry_id, i);
    out.extra = detail::collect_extra(j, {"persona_id", "conversation_id", "mode", "facts", "insights", "step_count"});
    out.check_integrity();
    bank = std::move(out);
}

std::string serialize_bank(const MemoryBank& bank) {
    return Json(bank).dump(2) + "\n";
}

MemoryBank parse_bank(std::string_view text) {
    try {
        return Json::parse(text).get<MemoryBank>();
    } catch (const Json::exception& e) {
        fail(ErrorCode::SchemaViolation, std::string("memory bank: ") + e.what());
    }
}

MemoryBank load_bank(const std::string& path) {
    try {
        return parse_bank(util::read_file(path));
    } catch (const Error& e) {
        throw e.with_context(path);
    }
}

void save_bank(const MemoryBank& bank, const std::string& path) {
    util::write_file_atomic(path, serialize_bank(bank));
}

}  // namespace dualmem
