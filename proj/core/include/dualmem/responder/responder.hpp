#pragma once

#include <string>

#include "dualmem/gateway/gateway.hpp"
#include "dualmem/prompts/prompt_library.hpp"
#include "dualmem/retrieval/retrieval.hpp"

namespace dualmem {

// Context text used when retrieval returned nothing (the no-memory setting).
inline constexpr std::string_view kNoMemoryMarker = "(no relevant memory)";

struct ResponseRecord {
    std::string query_id;
    std::string response_text;
    RetrievalResult retrieval;
    std::string prompt_fingerprint;
    bool memory_absent = false;
};

void to_json(Json& j, const ResponseRecord& r);
void from_json(const Json& j, ResponseRecord& r);

// system: persona content + role-play instruction; system: retrieved context
// (or kNoMemoryMarker); user: the query. Pure function of its inputs.
ChatRequest assemble_prompt(const Persona& persona, const Query& query, const RetrievalResult& retrieval,
                            const PromptLibrary& prompts = PromptLibrary::defaults(),
                            ChatParams params = default_params(RoleTag::RolePlayAgent));

// Throws MalformedModelOutput for an empty reply; gateway errors propagate.
ResponseRecord respond(const Persona& persona, const Query& query, const RetrievalResult& retrieval,
                       Gateway& gateway, const PromptLibrary& prompts = PromptLibrary::defaults(),
                       ChatParams params = default_params(RoleTag::RolePlayAgent));

}  // namespace dualmem
