#include "dualmem/prompts/prompt_library.hpp"

#include <utility>

#include "dualmem/error.hpp"
#include "dualmem/util/io.hpp"

namespace dualmem {

namespace {

const std::pair<const char*, const char*> kBuiltin[] = {
#include "prompt_defaults.inc"
};

bool is_section_header(std::string_view line, std::string& tag) {
    for (std::string_view t : {"system", "context", "user", "assistant"}) {
        if (line.size() == t.size() + 2 && line.front() == '[' && line.back() == ']' &&
            line.substr(1, t.size()) == t) {
            tag = std::string(t);
            return true;
        }
    }
    return false;
}

bool is_ident_char(char c) {
    return (c >= 'a' && c <= 'z') || c == '_';
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string name, std::string_view text) {
    PromptTemplate tpl;
    tpl.name = std::move(name);
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        std::string tag;
        if (is_section_header(line, tag)) {
            tpl.sections.push_back({tag, {}});
        } else if (!tpl.sections.empty()) {
            tpl.sections.back().text.append(line);
            tpl.sections.back().text.push_back('\n');
        } else if (!line.empty()) {
            fail(ErrorCode::InvalidConfig, "prompt '" + tpl.name + "': text before the first section header");
        }
        if (eol == text.size()) break;
        pos = eol + 1;
    }
    if (tpl.sections.empty()) fail(ErrorCode::InvalidConfig, "prompt '" + tpl.name + "' has no sections");
    for (auto& s : tpl.sections) {
        while (!s.text.empty() && s.text.back() == '\n') s.text.pop_back();
    }
    return tpl;
}

std::string substitute(std::string_view text, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '{') {
            std::size_t j = i + 1;
            while (j < text.size() && is_ident_char(text[j])) ++j;
            if (j < text.size() && text[j] == '}' && j > i + 1) {
                auto it = values.find(std::string(text.substr(i + 1, j - i - 1)));
                if (it != values.end()) {
                    out += it->second;
                    i = j + 1;
                    continue;
                }
            }
        }
        out.push_back(text[i++]);
    }
    return out;
}

std::vector<ChatMessage> PromptTemplate::render(const std::map<std::string, std::string>& values) const {
    std::vector<ChatMessage> messages;
    messages.reserve(sections.size());
    for (const auto& s : sections) {
        ChatSpeaker speaker = ChatSpeaker::System;
        if (s.tag == "user") speaker = ChatSpeaker::User;
        if (s.tag == "assistant") speaker = ChatSpeaker::Assistant;
        messages.push_back({speaker, substitute(s.text, values)});
    }
    return messages;
}

const PromptLibrary& PromptLibrary::defaults() {
    static const PromptLibrary lib = [] {
        PromptLibrary l;
        for (const auto& [name, text] : kBuiltin) {
            l.raw_.emplace(name, text);
            l.templates_.emplace(name, PromptTemplate::parse(name, text));
        }
        return l;
    }();
    return lib;
}

PromptLibrary PromptLibrary::with_overrides(const std::filesystem::path& dir) {
    PromptLibrary lib = defaults();
    if (!std::filesystem::is_directory(dir)) {
        fail(ErrorCode::IoError, "prompt directory " + dir.string() + " does not exist");
    }
    for (auto& [name, tpl] : lib.templates_) {
        auto path = dir / (name + ".txt");
        if (std::filesystem::exists(path)) {
            std::string text = util::read_file(path);
            tpl = PromptTemplate::parse(name, text);
            lib.raw_[name] = std::move(text);
        }
    }
    return lib;
}

const PromptTemplate& PromptLibrary::get(std::string_view name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) fail(ErrorCode::InvalidConfig, "unknown prompt template '" + std::string(name) + "'");
    return it->second;
}

std::vector<std::string> PromptLibrary::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : templates_) out.push_back(name);
    return out;
}

std::string PromptLibrary::raw(std::string_view name) const {
    auto it = raw_.find(name);
    if (it == raw_.end()) fail(ErrorCode::InvalidConfig, "unknown prompt template '" + std::string(name) + "'");
    return it->second;
}

}  // namespace dualmem
