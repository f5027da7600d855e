#include "dualmem/testing/scripted_llm.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "dualmem/prompts/prompt_library.hpp"
#include "dualmem/responder/responder.hpp"

namespace dualmem::testing {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Leading text of a template's first section, up to its first placeholder.
std::string template_prefix(std::string_view name) {
    const auto& t = PromptLibrary::defaults().get(name);
    const std::string& text = t.sections.front().text;
    std::size_t brace = text.find('{');
    std::string prefix = text.substr(0, brace == std::string::npos ? text.size() : brace);
    while (!prefix.empty() && std::isspace(static_cast<unsigned char>(prefix.back()))) prefix.pop_back();
    return prefix;
}

std::vector<std::string> lines_of(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        out.emplace_back(text.substr(pos, end - pos));
        pos = end + 1;
    }
    return out;
}

std::vector<std::string> sentences_of(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < text.size(); ++i) {
        cur.push_back(text[i]);
        bool end = (text[i] == '.' || text[i] == '!' || text[i] == '?') &&
                   (i + 1 == text.size() || text[i + 1] == ' ');
        if (end || i + 1 == text.size()) {
            std::size_t b = cur.find_first_not_of(' ');
            if (b != std::string::npos) out.push_back(cur.substr(b));
            cur.clear();
        }
    }
    return out;
}

std::size_t word_count(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : s) {
        bool w = !std::isspace(static_cast<unsigned char>(c));
        if (w && !in_word) ++n;
        in_word = w;
    }
    return n;
}

Json chat_body(const std::string& content) {
    return Json{{"choices", Json::array({Json{{"index", 0},
                                              {"message", Json{{"role", "assistant"}, {"content", content}}}}})}};
}

std::string facts_reply(const ChatCall& call, const ScriptOptions& options) {
    if (options.malformed_facts) return "I could not find anything in particular.";
    Json facts = Json::array();
    for (const auto& line : lines_of(call.section("Conversation segment:"))) {
        if (line.rfind("User: ", 0) != 0) continue;
        for (const auto& s : sentences_of(std::string_view(line).substr(6))) {
            if (facts.size() >= options.max_facts) break;
            if (word_count(s) >= 4) facts.push_back(s);
        }
    }
    return facts.dump();
}

std::string insights_reply(const ChatCall& call, const ScriptOptions& options) {
    if (options.null_insights) return "null";
    auto fresh = parse_entry_lines(call.section("New facts:"));
    auto prior = parse_entry_lines(call.section("Earlier memory:"));
    if (fresh.empty()) return "null";

    std::vector<std::string> ids{fresh.front().id};
    std::string text = "Because " + fresh.front().text;
    for (auto it = prior.rbegin(); it != prior.rend(); ++it) {
        if (!it->insight) {
            ids.push_back(it->id);
            text += " and earlier " + it->text;
            break;
        }
    }
    Json out = Json::array();
    out.push_back(Json{{"text", text + ", this matters to the user."}, {"fact_ids", ids}});
    if (options.dangling_links) {
        out.push_back(Json{{"text", "An unsupported hunch."}, {"fact_ids", {"nowhere:0:fact:1"}}});
    }
    return out.dump();
}

std::string role_play_reply(const ChatCall& call) {
    std::string memory;
    for (const auto& m : call.messages) {
        if (m.speaker != ChatSpeaker::System) continue;
        auto entries = parse_entry_lines(m.text);
        if (!entries.empty()) {
            memory = entries.front().text;
            break;
        }
    }
    if (memory.empty()) return "I don't know much about your situation yet, but tell me more and we'll figure it out.";
    return "I remember this: " + memory + " So let's think it through together.";
}

std::string judge_reply(const ChatCall& call) {
    const std::uint64_t h = fnv1a(call.section("Candidate response:"));
    auto score = [&](int shift) { return 3.0 + static_cast<double>((h >> shift) & 3U) * 0.5; };
    return Json{{"info", score(0)},
                {"logic", score(8)},
                {"consistency", score(16)},
                {"attractiveness", score(24)},
                {"justification", "scripted"}}
        .dump();
}

std::string safety_reply(const ChatCall& call) {
    std::string lower = call.section("Conversation:");
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    bool violent = lower.find("violence") != std::string::npos || lower.find("kill") != std::string::npos;
    return Json{{"safe", !violent},
                {"violations", violent ? Json::array({"violence"}) : Json::array()},
                {"rationale", violent ? "mentions violence" : "nothing flagged"}}
        .dump();
}

}  // namespace

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::FactExtraction: return "fact_extraction";
        case Stage::InsightDerivation: return "insight_derivation";
        case Stage::RolePlay: return "role_play";
        case Stage::JudgeQuality: return "judge_quality";
        case Stage::QaMemoryNecessity: return "qa_memory_necessity";
        case Stage::QaInsightSpecificity: return "qa_insight_specificity";
        case Stage::QaSafety: return "qa_safety";
        case Stage::Unknown: break;
    }
    return "unknown";
}

std::string ChatCall::user_text() const {
    for (const auto& m : messages) {
        if (m.speaker == ChatSpeaker::User) return m.text;
    }
    return {};
}

std::string ChatCall::section(std::string_view header) const {
    const std::string text = user_text();
    std::size_t start = text.find(header);
    if (start == std::string::npos) return {};
    start += header.size();
    if (start < text.size() && text[start] == '\n') ++start;

    // The next "\n\n<Header>:\n" ends the section.
    std::size_t pos = start;
    while (true) {
        std::size_t blank = text.find("\n\n", pos);
        if (blank == std::string::npos) return text.substr(start);
        std::size_t line_end = text.find('\n', blank + 2);
        std::string_view next = std::string_view(text).substr(
            blank + 2, (line_end == std::string::npos ? text.size() : line_end) - blank - 2);
        if (!next.empty() && next.back() == ':' && next.find(' ') == next.rfind(' ') &&
            std::isupper(static_cast<unsigned char>(next.front()))) {
            return text.substr(start, blank - start);
        }
        pos = blank + 1;
    }
}

Stage classify(const std::vector<ChatMessage>& messages) {
    static const std::array<std::pair<Stage, std::string>, 7> prefixes = {{
        {Stage::InsightDerivation, template_prefix("insight_derivation")},
        {Stage::FactExtraction, template_prefix("fact_extraction")},
        {Stage::JudgeQuality, template_prefix("judge_quality")},
        {Stage::QaMemoryNecessity, template_prefix("qa_memory_necessity")},
        {Stage::QaInsightSpecificity, template_prefix("qa_insight_specificity")},
        {Stage::QaSafety, template_prefix("qa_safety")},
        {Stage::RolePlay, "You are this character."},
    }};
    if (messages.empty()) return Stage::Unknown;
    const std::string& system = messages.front().text;
    for (const auto& [stage, prefix] : prefixes) {
        if (stage == Stage::RolePlay) continue;
        if (system.rfind(prefix, 0) == 0) return stage;
    }
    if (system.find(prefixes.back().second) != std::string::npos) return Stage::RolePlay;
    return Stage::Unknown;
}

std::vector<ParsedEntryLine> parse_entry_lines(std::string_view block) {
    std::vector<ParsedEntryLine> out;
    for (const auto& line : lines_of(block)) {
        bool insight = line.rfind("[INSIGHT] ", 0) == 0;
        bool fact = line.rfind("[FACT] ", 0) == 0;
        if (!insight && !fact) continue;
        std::size_t id_start = insight ? 10 : 7;
        std::size_t colon = line.find(": ", id_start);
        if (colon == std::string::npos) continue;
        out.push_back({line.substr(id_start, colon - id_start), line.substr(colon + 2), insight});
    }
    return out;
}

std::string heuristic_reply(const ChatCall& call, const ScriptOptions& options) {
    switch (call.stage) {
        case Stage::FactExtraction: return facts_reply(call, options);
        case Stage::InsightDerivation: return insights_reply(call, options);
        case Stage::RolePlay: return role_play_reply(call);
        case Stage::JudgeQuality: return judge_reply(call);
        case Stage::QaMemoryNecessity: return R"({"captures_insight": false, "rationale": "generic answer"})";
        case Stage::QaInsightSpecificity: return R"({"persona_specific": true, "rationale": "tied to the persona"})";
        case Stage::QaSafety: return safety_reply(call);
        case Stage::Unknown: break;
    }
    return "unscripted";
}

ScriptedTransport::ScriptedTransport(ScriptOptions options) : options_(options) {}

void ScriptedTransport::set_handler(Stage stage, Handler handler) {
    std::lock_guard lock(mu_);
    handlers_[stage] = std::move(handler);
}

void ScriptedTransport::fail_next(int status, int times) {
    std::lock_guard lock(mu_);
    for (int i = 0; i < times; ++i) failures_.push_back(status);
}

HttpResponse ScriptedTransport::post(const HttpRequest& request) {
    Handler handler;
    ChatCall call;
    Json body = Json::parse(request.body);
    const bool is_embed = request.url.size() >= 11 && request.url.ends_with("/embeddings");
    {
        std::lock_guard lock(mu_);
        ++calls_;
        if (!failures_.empty()) {
            int status = failures_.front();
            failures_.pop_front();
            return {status, R"({"error": "scripted failure"})"};
        }
    }

    if (is_embed) {
        auto texts = body.at("input").get<std::vector<std::string>>();
        Json data = Json::array();
        for (std::size_t i = 0; i < texts.size(); ++i) {
            data.push_back(Json{{"index", i}, {"embedding", embedder_.embed_one(texts[i])}});
        }
        return {200, Json{{"data", data}}.dump()};
    }

    call.model = body.value("model", "");
    for (const auto& m : body.at("messages")) {
        const std::string role = m.at("role").get<std::string>();
        ChatSpeaker speaker = role == "system" ? ChatSpeaker::System
                              : role == "assistant" ? ChatSpeaker::Assistant
                                                    : ChatSpeaker::User;
        call.messages.push_back({speaker, m.at("content").get<std::string>()});
    }
    call.stage = classify(call.messages);
    const std::string reformat_prefix = template_prefix("reformat");
    call.reformat = call.messages.size() > 1 && call.messages.back().speaker == ChatSpeaker::User &&
                    call.messages.back().text.rfind(reformat_prefix, 0) == 0;
    {
        std::lock_guard lock(mu_);
        history_.push_back(call);
        if (auto it = handlers_.find(call.stage); it != handlers_.end()) handler = it->second;
    }
    std::string reply = handler ? handler(call) : heuristic_reply(call, options_);
    return {200, chat_body(reply).dump()};
}

std::size_t ScriptedTransport::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::vector<ChatCall> ScriptedTransport::history() const {
    std::lock_guard lock(mu_);
    return history_;
}

GatewayConfig fake_config() {
    GatewayConfig config;
    config.llm_base_url = "http://scripted.invalid/v1";
    config.api_key = "test-key";
    config.initial_backoff = std::chrono::milliseconds(0);
    return config;
}

std::shared_ptr<Gateway> make_scripted_gateway(std::shared_ptr<ScriptedTransport> transport) {
    auto gateway = std::make_shared<Gateway>(fake_config(), std::make_shared<Cassette>(), std::move(transport));
    gateway->set_sleeper([](std::chrono::milliseconds) {});
    return gateway;
}

std::shared_ptr<Gateway> make_recording_gateway(const std::filesystem::path& dir,
                                                std::shared_ptr<ScriptedTransport> transport) {
    auto gateway = std::make_shared<Gateway>(fake_config(), std::make_shared<Cassette>(dir, CassetteMode::Record),
                                             std::move(transport));
    gateway->set_sleeper([](std::chrono::milliseconds) {});
    return gateway;
}

std::shared_ptr<Gateway> make_replay_gateway(const std::filesystem::path& dir) {
    return std::make_shared<Gateway>(GatewayConfig{}, std::make_shared<Cassette>(dir, CassetteMode::Replay));
}

}  // namespace dualmem::testing
