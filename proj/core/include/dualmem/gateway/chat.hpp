#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dualmem/core/types.hpp"

namespace dualmem {

// Which logical model a request is addressed to.
enum class RoleTag { MemoryModel, RolePlayAgent, Judge };

enum class ChatSpeaker { System, User, Assistant };

enum class ResponseFormat { FreeText, JsonObject };

std::string_view to_string(RoleTag tag);
std::string_view to_string(ChatSpeaker speaker);
std::string_view to_string(ResponseFormat format);
RoleTag role_tag_from_string(std::string_view name);

struct ChatMessage {
    ChatSpeaker speaker = ChatSpeaker::User;
    std::string text;
};

struct ChatParams {
    double temperature = 0.0;
    int max_tokens = 1024;
    ResponseFormat response_format = ResponseFormat::FreeText;
};

// Memory model: temperature 1.0, free text. Role-play agent: 0.8, free text.
// Judge: 0.0, JSON object.
ChatParams default_params(RoleTag tag);

struct ChatRequest {
    RoleTag role_tag = RoleTag::MemoryModel;
    std::vector<ChatMessage> messages;
    ChatParams params;
    // Distinguishes otherwise identical requests (e.g. repeated judge runs).
    // Part of the fingerprint; never sent over the wire.
    std::string salt;
};

// Throws InvalidConfig when messages are empty, the first message is not a
// system message, or temperature/max_tokens are out of range.
void validate_request(const ChatRequest& request);

// The canonical serialization that is hashed into a fingerprint:
//   {"kind":"chat","messages":[{"speaker":..,"text":..},..],
//    "params":{"max_tokens":..,"response_format":..,"temperature":..},
//    "role_tag":..,"salt":..,"version":1}
// Keys are sorted, no whitespace, UTF-8 emitted verbatim.
Json canonical_request(const ChatRequest& request);
std::string fingerprint(const ChatRequest& request);

// {"kind":"embed","model":..,"texts":[..],"version":1}
Json canonical_embed_request(const std::vector<std::string>& texts, std::string_view model);
std::string embed_fingerprint(const std::vector<std::string>& texts, std::string_view model);

// Serialization used by the digest above.
std::string canonical_dump(const Json& j);

}  // namespace dualmem
