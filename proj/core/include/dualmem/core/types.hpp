#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace dualmem {

using Json = nlohmann::json;
using Embedding = std::vector<float>;

// ---------------------------------------------------------------------------
// Persona
// ---------------------------------------------------------------------------

enum class ContentSource { Provided, Derived };

struct Persona {
    std::int64_t id = 0;
    std::string category;
    std::string role_name;
    std::string title;
    std::string background;
    std::string current_status;
    std::string hometown;
    std::string core_values;
    std::string goals;
    std::string dilemma;
    std::string personality;
    std::string expression_style;
    std::string hobbies;
    std::string daily_hobby;
    std::string favorite_food;
    std::string favorite_animal;
    std::string favorite_plant;
    std::string preferred_travel_city;
    std::string content;

    // Which load path produced `content`; not serialized.
    ContentSource content_source = ContentSource::Provided;
    // Fields not named above, kept verbatim for round-trip.
    Json extra = Json::object();
};

struct PersonaField {
    std::string_view name;
    std::string_view label;
    std::string Persona::*member;
};

// The descriptive fields in profile-schema order. This is the order used to
// build `content`.
const std::array<PersonaField, 16>& persona_descriptive_fields();

// Labeled, newline-separated concatenation of the descriptive fields.
// Throws MissingField(name) for the first empty descriptive field.
std::string derive_persona_content(const Persona& persona);

// `content` when set, else derive_persona_content.
std::string persona_text(const Persona& persona);

// ---------------------------------------------------------------------------
// Conversation
// ---------------------------------------------------------------------------

enum class Speaker { User, Assistant };

std::string_view to_string(Speaker role);

struct Turn {
    Speaker role = Speaker::User;
    std::string content;
    std::size_t turn_index = 0;
};

struct Conversation {
    std::string id;
    std::vector<Turn> turns;
    Json extra = Json::object();
};

// Throws SchemaViolation when turns are empty, indices are not 0..n-1, or roles
// do not alternate starting with User.
void validate_conversation(const Conversation& conversation);

struct Chunk {
    std::string chunk_id;
    std::string conversation_id;
    std::size_t step_index = 1;
    std::vector<Turn> turns;
    std::size_t token_count = 0;
};

// ---------------------------------------------------------------------------
// Memory entries
// ---------------------------------------------------------------------------

enum class EntryKind { Fact, Insight };

std::string_view to_string(EntryKind kind);

// `{conversation_id}:{step_index}:{kind}:{ordinal}`
std::string make_entry_id(std::string_view conversation_id, std::size_t step_index,
                          EntryKind kind, std::size_t ordinal);
std::string make_chunk_id(std::string_view conversation_id, std::size_t step_index);

struct FactEntry {
    std::string entry_id;
    std::string text;
    std::size_t step_index = 0;
    std::string source_chunk_id;
    std::optional<Embedding> embedding;
};

struct InsightEntry {
    std::string entry_id;
    std::string text;
    std::size_t step_index = 0;
    std::vector<std::string> linked_fact_ids;
    std::optional<Embedding> embedding;
};

// ---------------------------------------------------------------------------
// Query and dataset record
// ---------------------------------------------------------------------------

enum class QueryType {
    InterpretiveAttribution,
    ContradictionRevelation,
    ValueJudgment,
    DecisionGuidance,
};

std::string_view to_string(QueryType type);
QueryType query_type_from_string(std::string_view name);
const std::array<QueryType, 4>& all_query_types();

struct Query {
    std::string query_id;
    std::string text;
    QueryType query_type = QueryType::InterpretiveAttribution;
};

struct RoleMemoRecord {
    Persona persona;
    Conversation conversation;
    Query query;
    std::vector<std::string> fragments;
    std::map<std::string, std::string> fragment_positions;
    std::string gt_insight;
    std::string connector;
    std::string reference_response;
    Json extra = Json::object();

    const std::string& record_id() const { return query.query_id; }
};

// Throws SchemaViolation for cardinality or containment failures; a fragment
// position must match at least one User turn verbatim and contain its fragment.
void validate_record(const RoleMemoRecord& record);

// ---------------------------------------------------------------------------
// JSON (snake_case field names; unknown fields survive a round trip)
// ---------------------------------------------------------------------------

void to_json(Json& j, const Persona& p);
void from_json(const Json& j, Persona& p);
void to_json(Json& j, const Turn& t);
void from_json(const Json& j, Turn& t);
void to_json(Json& j, const Conversation& c);
void from_json(const Json& j, Conversation& c);
void to_json(Json& j, const Chunk& c);
void from_json(const Json& j, Chunk& c);
void to_json(Json& j, const FactEntry& e);
void from_json(const Json& j, FactEntry& e);
void to_json(Json& j, const InsightEntry& e);
void from_json(const Json& j, InsightEntry& e);
void to_json(Json& j, const Query& q);
void from_json(const Json& j, Query& q);
void to_json(Json& j, const RoleMemoRecord& r);
void from_json(const Json& j, RoleMemoRecord& r);

}  // namespace dualmem
