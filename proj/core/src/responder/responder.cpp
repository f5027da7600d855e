#include "dualmem/responder/responder.hpp"

#include "dualmem/error.hpp"

namespace dualmem {

void to_json(Json& j, const ResponseRecord& r) {
    j = Json{{"query_id", r.query_id},
             {"response_text", r.response_text},
             {"retrieval", r.retrieval},
             {"prompt_fingerprint", r.prompt_fingerprint},
             {"memory_absent", r.memory_absent}};
}

void from_json(const Json& j, ResponseRecord& r) {
    r.query_id = j.at("query_id").get<std::string>();
    r.response_text = j.at("response_text").get<std::string>();
    r.retrieval = j.at("retrieval").get<RetrievalResult>();
    r.prompt_fingerprint = j.at("prompt_fingerprint").get<std::string>();
    r.memory_absent = j.value("memory_absent", false);
}

ChatRequest assemble_prompt(const Persona& persona, const Query& query, const RetrievalResult& retrieval,
                            const PromptLibrary& prompts, ChatParams params) {
    const std::string memory =
        retrieval.rendered_context.empty() ? std::string(kNoMemoryMarker) : retrieval.rendered_context;

    ChatRequest request;
    request.role_tag = RoleTag::RolePlayAgent;
    request.params = params;
    request.messages =
        prompts.get("role_play").render({{"persona", persona_text(persona)}, {"memory", memory}, {"query", query.text}});
    return request;
}

ResponseRecord respond(const Persona& persona, const Query& query, const RetrievalResult& retrieval,
                       Gateway& gateway, const PromptLibrary& prompts, ChatParams params) {
    ChatRequest request = assemble_prompt(persona, query, retrieval, prompts, params);
    ResponseRecord record;
    record.query_id = query.query_id;
    record.prompt_fingerprint = fingerprint(request);
    record.response_text = gateway.chat(request);
    if (record.response_text.empty()) {
        fail(ErrorCode::MalformedModelOutput, "role-play agent returned an empty reply for " + query.query_id);
    }
    record.retrieval = retrieval;
    record.memory_absent = retrieval.rendered_context.empty();
    return record;
}

}  // namespace dualmem
