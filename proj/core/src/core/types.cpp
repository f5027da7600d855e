#include "dualmem/core/types.hpp"

#include <algorithm>
#include <set>

#include "dualmem/error.hpp"
#include "../json_fields.hpp"

namespace dualmem {

using detail::collect_extra;
using detail::require;
using detail::require_index;
using detail::require_nonempty;
using detail::require_string;
using detail::with_extra;

const std::array<PersonaField, 16>& persona_descriptive_fields() {
    static const std::array<PersonaField, 16> fields{{
        {"role_name", "Name", &Persona::role_name},
        {"title", "Title", &Persona::title},
        {"background", "Background", &Persona::background},
        {"current_status", "Current status", &Persona::current_status},
        {"hometown", "Hometown", &Persona::hometown},
        {"core_values", "Core values", &Persona::core_values},
        {"goals", "Goals", &Persona::goals},
        {"dilemma", "Dilemma", &Persona::dilemma},
        {"personality", "Personality", &Persona::personality},
        {"expression_style", "Expression style", &Persona::expression_style},
        {"hobbies", "Hobbies", &Persona::hobbies},
        {"daily_hobby", "Daily hobby", &Persona::daily_hobby},
        {"favorite_food", "Favorite food", &Persona::favorite_food},
        {"favorite_animal", "Favorite animal", &Persona::favorite_animal},
        {"favorite_plant", "Favorite plant", &Persona::favorite_plant},
        {"preferred_travel_city", "Preferred travel city", &Persona::preferred_travel_city},
    }};
    return fields;
}

std::string derive_persona_content(const Persona& persona) {
    std::string out;
    for (const auto& field : persona_descriptive_fields()) {
        const std::string& value = persona.*field.member;
        if (value.empty()) fail(ErrorCode::MissingField, std::string(field.name));
        if (!out.empty()) out += '\n';
        out += field.label;
        out += ": ";
        out += value;
    }
    return out;
}

std::string persona_text(const Persona& persona) {
    return persona.content.empty() ? derive_persona_content(persona) : persona.content;
}

std::string_view to_string(Speaker role) {
    return role == Speaker::User ? "User" : "Assistant";
}

std::string_view to_string(EntryKind kind) {
    return kind == EntryKind::Fact ? "fact" : "insight";
}

std::string make_entry_id(std::string_view conversation_id, std::size_t step_index,
                          EntryKind kind, std::size_t ordinal) {
    std::string id(conversation_id);
    id += ':';
    id += std::to_string(step_index);
    id += ':';
    id += to_string(kind);
    id += ':';
    id += std::to_string(ordinal);
    return id;
}

std::string make_chunk_id(std::string_view conversation_id, std::size_t step_index) {
    return std::string(conversation_id) + ":" + std::to_string(step_index) + ":chunk";
}

namespace {

constexpr std::array<std::pair<QueryType, std::string_view>, 4> kQueryTypeNames{{
    {QueryType::InterpretiveAttribution, "InterpretiveAttribution"},
    {QueryType::ContradictionRevelation, "ContradictionRevelation"},
    {QueryType::ValueJudgment, "ValueJudgment"},
    {QueryType::DecisionGuidance, "DecisionGuidance"},
}};

// Labels used by the upstream generation prompts.
constexpr std::array<std::pair<std::string_view, QueryType>, 5> kQueryTypeAliases{{
    {"Attribution", QueryType::InterpretiveAttribution},
    {"Contradiction Resolution", QueryType::ContradictionRevelation},
    {"Contradiction", QueryType::ContradictionRevelation},
    {"Value Judgment", QueryType::ValueJudgment},
    {"Decision", QueryType::DecisionGuidance},
}};

}  // namespace

std::string_view to_string(QueryType type) {
    for (const auto& [t, name] : kQueryTypeNames) {
        if (t == type) return name;
    }
    return "InterpretiveAttribution";
}

QueryType query_type_from_string(std::string_view name) {
    for (const auto& [t, n] : kQueryTypeNames) {
        if (n == name) return t;
    }
    for (const auto& [alias, t] : kQueryTypeAliases) {
        if (alias == name) return t;
    }
    fail(ErrorCode::SchemaViolation, "unknown query_type '" + std::string(name) + "'");
}

const std::array<QueryType, 4>& all_query_types() {
    static const std::array<QueryType, 4> types{
        QueryType::InterpretiveAttribution, QueryType::ContradictionRevelation,
        QueryType::ValueJudgment, QueryType::DecisionGuidance};
    return types;
}

void validate_conversation(const Conversation& conversation) {
    if (conversation.turns.empty()) {
        fail(ErrorCode::SchemaViolation, "conversation '" + conversation.id + "' has no turns");
    }
    for (std::size_t i = 0; i < conversation.turns.size(); ++i) {
        const Turn& t = conversation.turns[i];
        if (t.turn_index != i) {
            fail(ErrorCode::SchemaViolation, "turn_index " + std::to_string(t.turn_index) +
                                                 " at position " + std::to_string(i));
        }
        Speaker expected = (i % 2 == 0) ? Speaker::User : Speaker::Assistant;
        if (t.role != expected) {
            fail(ErrorCode::SchemaViolation, "turn " + std::to_string(i) + " should be " +
                                                 std::string(to_string(expected)));
        }
    }
}

void validate_record(const RoleMemoRecord& record) {
    if (record.query.query_id.empty()) fail(ErrorCode::SchemaViolation, "query.query_id is empty");
    if (record.query.text.empty()) fail(ErrorCode::SchemaViolation, "query.text is empty");
    if (record.fragments.size() != 2) {
        fail(ErrorCode::SchemaViolation,
             "fragments: expected exactly 2, got " + std::to_string(record.fragments.size()));
    }
    if (record.gt_insight.empty()) fail(ErrorCode::SchemaViolation, "gt_insight is empty");
    validate_conversation(record.conversation);

    std::set<std::string> keys;
    for (const auto& [k, v] : record.fragment_positions) keys.insert(k);
    std::set<std::string> frags(record.fragments.begin(), record.fragments.end());
    if (frags.size() != 2 || keys != frags) {
        fail(ErrorCode::SchemaViolation, "fragment_positions keys must equal the two distinct fragments");
    }
    for (const auto& fragment : record.fragments) {
        if (fragment.empty()) fail(ErrorCode::SchemaViolation, "fragments: empty fragment");
        const std::string& utterance = record.fragment_positions.at(fragment);
        if (utterance.find(fragment) == std::string::npos) {
            fail(ErrorCode::SchemaViolation, "fragment_positions: utterance does not contain fragment '" +
                                                 fragment + "'");
        }
        bool found = std::any_of(record.conversation.turns.begin(), record.conversation.turns.end(),
                                 [&](const Turn& t) {
                                     return t.role == Speaker::User && t.content == utterance;
                                 });
        if (!found) {
            fail(ErrorCode::SchemaViolation,
                 "fragment_positions: no User turn matches the utterance for '" + fragment + "'");
        }
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

void to_json(Json& j, const Persona& p) {
    j = with_extra(p.extra);
    j["id"] = p.id;
    j["category"] = p.category;
    for (const auto& field : persona_descriptive_fields()) {
        j[std::string(field.name)] = p.*field.member;
    }
    j["content"] = p.content;
}

void from_json(const Json& j, Persona& p) {
    const Json& id = require(j, "id");
    if (!id.is_number_integer()) fail(ErrorCode::SchemaViolation, "field 'id' must be an integer");
    p.id = id.get<std::int64_t>();

    auto read_field = [&](std::string_view name) {
        std::string value = require_string(j, name);
        if (value.empty()) fail(ErrorCode::MissingField, std::string(name));
        return value;
    };
    p.category = read_field("category");
    for (const auto& field : persona_descriptive_fields()) {
        p.*field.member = read_field(field.name);
    }

    std::string derived = derive_persona_content(p);
    auto it = j.find("content");
    if (it == j.end() || it->is_null()) {
        p.content = std::move(derived);
        p.content_source = ContentSource::Derived;
    } else {
        if (!it->is_string()) fail(ErrorCode::SchemaViolation, "field 'content' must be a string");
        if (it->get<std::string>() != derived) {
            fail(ErrorCode::SchemaViolation, "field 'content' does not match the derived concatenation");
        }
        p.content = std::move(derived);
        p.content_source = ContentSource::Provided;
    }

    p.extra = collect_extra(j, {"id", "category", "role_name", "title", "background", "current_status",
                                "hometown", "core_values", "goals", "dilemma", "personality",
                                "expression_style", "hobbies", "daily_hobby", "favorite_food",
                                "favorite_animal", "favorite_plant", "preferred_travel_city", "content"});
}

void to_json(Json& j, const Turn& t) {
    j = Json{{"role", to_string(t.role)}, {"content", t.content}, {"turn_index", t.turn_index}};
}

void from_json(const Json& j, Turn& t) {
    std::string role = require_string(j, "role");
    if (role == "User" || role == "user") {
        t.role = Speaker::User;
    } else if (role == "Assistant" || role == "assistant") {
        t.role = Speaker::Assistant;
    } else {
        fail(ErrorCode::SchemaViolation, "role must be User or Assistant, got '" + role + "'");
    }
    t.content = require_string(j, "content");
    t.turn_index = j.contains("turn_index") ? require_index(j, "turn_index") : static_cast<std::size_t>(-1);
}

void to_json(Json& j, const Conversation& c) {
    j = with_extra(c.extra);
    j["id"] = c.id;
    j["turns"] = c.turns;
}

void from_json(const Json& j, Conversation& c) {
    c.id = require_nonempty(j, "id");
    const Json& turns = require(j, "turns");
    if (!turns.is_array()) fail(ErrorCode::SchemaViolation, "field 'turns' must be an array");
    c.turns.clear();
    c.turns.reserve(turns.size());
    for (std::size_t i = 0; i < turns.size(); ++i) {
        Turn t = turns[i].get<Turn>();
        // Turns without an explicit index take their position.
        if (t.turn_index == static_cast<std::size_t>(-1)) t.turn_index = i;
        c.turns.push_back(std::move(t));
    }
    c.extra = collect_extra(j, {"id", "turns"});
    validate_conversation(c);
}

void to_json(Json& j, const Chunk& c) {
    j = Json{{"chunk_id", c.chunk_id},
             {"conversation_id", c.conversation_id},
             {"step_index", c.step_index},
             {"turns", c.turns},
             {"token_count", c.token_count}};
}

void from_json(const Json& j, Chunk& c) {
    c.chunk_id = require_nonempty(j, "chunk_id");
    c.conversation_id = require_string(j, "conversation_id");
    c.step_index = require_index(j, "step_index");
    c.turns = require(j, "turns").get<std::vector<Turn>>();
    c.token_count = require_index(j, "token_count");
}

namespace {

void write_embedding(Json& j, const std::optional<Embedding>& e) {
    if (e) j["embedding"] = *e;
}

std::optional<Embedding> read_embedding(const Json& j) {
    auto it = j.find("embedding");
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_array()) fail(ErrorCode::SchemaViolation, "field 'embedding' must be an array");
    return it->get<Embedding>();
}

}  // namespace

void to_json(Json& j, const FactEntry& e) {
    j = Json{{"entry_id", e.entry_id},
             {"text", e.text},
             {"step_index", e.step_index},
             {"source_chunk_id", e.source_chunk_id}};
    write_embedding(j, e.embedding);
}

void from_json(const Json& j, FactEntry& e) {
    e.entry_id = require_nonempty(j, "entry_id");
    e.text = require_nonempty(j, "text");
    e.step_index = require_index(j, "step_index");
    e.source_chunk_id = require_string(j, "source_chunk_id");
    e.embedding = read_embedding(j);
}

void to_json(Json& j, const InsightEntry& e) {
    j = Json{{"entry_id", e.entry_id},
             {"text", e.text},
             {"step_index", e.step_index},
             {"linked_fact_ids", e.linked_fact_ids}};
    write_embedding(j, e.embedding);
}

void from_json(const Json& j, InsightEntry& e) {
    e.entry_id = require_nonempty(j, "entry_id");
    e.text = require_nonempty(j, "text");
    e.step_index = require_index(j, "step_index");
    const Json& links = require(j, "linked_fact_ids");
    if (!links.is_array()) fail(ErrorCode::SchemaViolation, "field 'linked_fact_ids' must be an array");
    e.linked_fact_ids = links.get<std::vector<std::string>>();
    e.embedding = read_embedding(j);
}

void to_json(Json& j, const Query& q) {
    j = Json{{"query_id", q.query_id}, {"text", q.text}, {"query_type", to_string(q.query_type)}};
}

void from_json(const Json& j, Query& q) {
    q.query_id = require_nonempty(j, "query_id");
    q.text = require_nonempty(j, "text");
    q.query_type = query_type_from_string(require_string(j, "query_type"));
}

void to_json(Json& j, const RoleMemoRecord& r) {
    j = with_extra(r.extra);
    j["persona"] = r.persona;
    j["conversation"] = r.conversation;
    j["query"] = r.query;
    j["fragments"] = r.fragments;
    j["fragment_positions"] = r.fragment_positions;
    j["gt_insight"] = r.gt_insight;
    j["connector"] = r.connector;
    j["reference_response"] = r.reference_response;
}

void from_json(const Json& j, RoleMemoRecord& r) {
    r.persona = require(j, "persona").get<Persona>();
    r.conversation = require(j, "conversation").get<Conversation>();
    r.query = require(j, "query").get<Query>();
    const Json& frags = require(j, "fragments");
    if (!frags.is_array()) fail(ErrorCode::SchemaViolation, "field 'fragments' must be an array");
    r.fragments = frags.get<std::vector<std::string>>();
    const Json& positions = require(j, "fragment_positions");
    if (!positions.is_object()) fail(ErrorCode::SchemaViolation, "field 'fragment_positions' must be an object");
    r.fragment_positions = positions.get<std::map<std::string, std::string>>();
    r.gt_insight = require_string(j, "gt_insight");
    r.connector = require_string(j, "connector");
    r.reference_response = require_string(j, "reference_response");
    r.extra = collect_extra(j, {"persona", "conversation", "query", "fragments", "fragment_positions",
                                "gt_insight", "connector", "reference_response"});
    validate_record(r);
}

}  // namespace dualmem
