#include "dualmem/gateway/chat.hpp"

#include "dualmem/error.hpp"
#include "dualmem/util/io.hpp"

namespace dualmem {

namespace {
constexpr int kFingerprintVersion = 1;
}

std::string_view to_string(RoleTag tag) {
    switch (tag) {
        case RoleTag::MemoryModel: return "MemoryModel";
        case RoleTag::RolePlayAgent: return "RolePlayAgent";
        case RoleTag::Judge: return "Judge";
    }
    return "MemoryModel";
}

std::string_view to_string(ChatSpeaker speaker) {
    switch (speaker) {
        case ChatSpeaker::System: return "system";
        case ChatSpeaker::User: return "user";
        case ChatSpeaker::Assistant: return "assistant";
    }
    return "user";
}

std::string_view to_string(ResponseFormat format) {
    return format == ResponseFormat::JsonObject ? "JsonObject" : "FreeText";
}

RoleTag role_tag_from_string(std::string_view name) {
    if (name == "MemoryModel") return RoleTag::MemoryModel;
    if (name == "RolePlayAgent") return RoleTag::RolePlayAgent;
    if (name == "Judge") return RoleTag::Judge;
    fail(ErrorCode::InvalidConfig, "unknown role tag '" + std::string(name) + "'");
}

ChatParams default_params(RoleTag tag) {
    switch (tag) {
        case RoleTag::MemoryModel: return {1.0, 1024, ResponseFormat::FreeText};
        case RoleTag::RolePlayAgent: return {0.8, 1024, ResponseFormat::FreeText};
        case RoleTag::Judge: return {0.0, 1024, ResponseFormat::JsonObject};
    }
    return {};
}

void validate_request(const ChatRequest& request) {
    if (request.messages.empty()) fail(ErrorCode::InvalidConfig, "chat request has no messages");
    if (request.messages.front().speaker != ChatSpeaker::System) {
        fail(ErrorCode::InvalidConfig, "first chat message must be a system message");
    }
    if (!(request.params.temperature >= 0.0)) fail(ErrorCode::InvalidConfig, "temperature must be >= 0");
    if (request.params.max_tokens <= 0) fail(ErrorCode::InvalidConfig, "max_tokens must be positive");
}

std::string canonical_dump(const Json& j) {
    return j.dump(-1, ' ', false, Json::error_handler_t::strict);
}

Json canonical_request(const ChatRequest& request) {
    Json messages = Json::array();
    for (const auto& m : request.messages) {
        messages.push_back(Json{{"speaker", to_string(m.speaker)}, {"text", m.text}});
    }
    return Json{{"kind", "chat"},
                {"version", kFingerprintVersion},
                {"role_tag", to_string(request.role_tag)},
                {"messages", std::move(messages)},
                {"params",
                 {{"temperature", request.params.temperature},
                  {"max_tokens", request.params.max_tokens},
                  {"response_format", to_string(request.params.response_format)}}},
                {"salt", request.salt}};
}

std::string fingerprint(const ChatRequest& request) {
    return util::sha256_hex(canonical_dump(canonical_request(request)));
}

Json canonical_embed_request(const std::vector<std::string>& texts, std::string_view model) {
    return Json{{"kind", "embed"}, {"version", kFingerprintVersion}, {"model", model}, {"texts", texts}};
}

std::string embed_fingerprint(const std::vector<std::string>& texts, std::string_view model) {
    return util::sha256_hex(canonical_dump(canonical_embed_request(texts, model)));
}

}  // namespace dualmem
