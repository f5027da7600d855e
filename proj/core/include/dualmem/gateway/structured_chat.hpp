#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dualmem/error.hpp"
#include "dualmem/gateway/gateway.hpp"
#include "dualmem/prompts/prompt_library.hpp"

namespace dualmem {

struct ParseFailure {
    ErrorCode code;
    std::string message;
};

template <class T>
using ParseOutcome = std::variant<T, ParseFailure>;

// Sends `request`; if the reply does not parse, sends one follow-up that shows
// the model its reply and asks for `format_description` (the `reformat`
// template). A second failure throws with the failure's own code. Fingerprints
// of the requests actually sent are appended to `fingerprints` when non-null.
template <class T>
T chat_structured(Gateway& gateway, ChatRequest request, const PromptLibrary& prompts,
                  std::string_view format_description,
                  const std::function<ParseOutcome<T>(std::string_view)>& parse,
                  std::vector<std::string>* fingerprints = nullptr) {
    if (fingerprints) fingerprints->push_back(fingerprint(request));
    std::string reply = gateway.chat(request);
    ParseOutcome<T> first = parse(reply);
    if (auto* value = std::get_if<T>(&first)) return std::move(*value);

    request.messages.push_back({ChatSpeaker::Assistant, reply});
    for (auto& m : prompts.get("reformat").render({{"format", std::string(format_description)}})) {
        request.messages.push_back(std::move(m));
    }
    if (fingerprints) fingerprints->push_back(fingerprint(request));
    ParseOutcome<T> second = parse(gateway.chat(request));
    if (auto* value = std::get_if<T>(&second)) return std::move(*value);
    const auto& failure = std::get<ParseFailure>(second);
    fail(failure.code, failure.message + " (after one reformat retry)");
}

}  // namespace dualmem
