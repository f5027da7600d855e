#include "dualmem/construction/output_parsing.hpp"

#include <cctype>

namespace dualmem {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_null_reply(std::string_view text) {
    std::string t = lower(trim(text));
    while (!t.empty() && (t.back() == '.' || t.back() == '"')) t.pop_back();
    while (!t.empty() && t.front() == '"') t.erase(t.begin());
    return t.empty() || t == "null" || t == "none" || t == "[]";
}

std::optional<Json> try_parse(std::string_view text) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
}

// "- x", "* x", "• x", "1. x", "1) x"
std::optional<std::string_view> line_item(std::string_view line) {
    line = trim(line);
    if (line.empty()) return std::nullopt;
    if (line.front() == '-' || line.front() == '*') return trim(line.substr(1));
    if (line.substr(0, 3) == "\xE2\x80\xA2") return trim(line.substr(3));
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) return trim(line.substr(i + 1));
    return std::nullopt;
}

std::optional<std::string> text_of_element(const Json& e, std::initializer_list<const char*> keys) {
    if (e.is_string()) return e.get<std::string>();
    if (e.is_object()) {
        for (const char* k : keys) {
            auto it = e.find(k);
            if (it != e.end() && it->is_string()) return it->get<std::string>();
        }
    }
    return std::nullopt;
}

}  // namespace

std::string_view strip_code_fence(std::string_view text) {
    text = trim(text);
    if (text.substr(0, 3) != "```") return text;
    std::size_t nl = text.find('\n');
    if (nl == std::string_view::npos) return text;
    text.remove_prefix(nl + 1);
    std::size_t close = text.rfind("```");
    if (close != std::string_view::npos) text = text.substr(0, close);
    return trim(text);
}

std::optional<Json> extract_json(std::string_view text) {
    text = strip_code_fence(text);
    if (auto j = try_parse(text)) return j;
    std::size_t open = text.find_first_of("[{");
    if (open == std::string_view::npos) return std::nullopt;
    char closer = text[open] == '[' ? ']' : '}';
    std::size_t close = text.rfind(closer);
    if (close == std::string_view::npos || close < open) return std::nullopt;
    return try_parse(text.substr(open, close - open + 1));
}

std::optional<std::vector<std::string>> parse_fact_list(std::string_view text) {
    if (is_null_reply(strip_code_fence(text))) return std::vector<std::string>{};

    if (auto j = extract_json(text)) {
        const Json* arr = &*j;
        if (j->is_object()) {
            auto it = j->find("facts");
            if (it == j->end()) return std::nullopt;
            arr = &*it;
        }
        if (arr->is_null()) return std::vector<std::string>{};
        if (!arr->is_array()) return std::nullopt;
        std::vector<std::string> facts;
        for (const auto& e : *arr) {
            auto t = text_of_element(e, {"text", "fact"});
            if (!t) return std::nullopt;
            std::string_view s = trim(*t);
            if (!s.empty()) facts.emplace_back(s);
        }
        return facts;
    }

    std::vector<std::string> items;
    std::string_view rest = strip_code_fence(text);
    while (!rest.empty()) {
        std::size_t nl = rest.find('\n');
        std::string_view line = rest.substr(0, nl);
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        if (auto item = line_item(line); item && !item->empty()) items.emplace_back(*item);
    }
    if (items.empty()) return std::nullopt;
    return items;
}

std::optional<std::vector<RawInsight>> parse_insight_list(std::string_view text) {
    if (is_null_reply(strip_code_fence(text))) return std::vector<RawInsight>{};
    auto j = extract_json(text);
    if (!j) return std::nullopt;

    Json arr;
    if (j->is_null()) return std::vector<RawInsight>{};
    if (j->is_array()) {
        arr = *j;
    } else if (j->is_object()) {
        if (auto it = j->find("insights"); it != j->end()) {
            if (it->is_null()) return std::vector<RawInsight>{};
            arr = *it;
        } else {
            arr = Json::array({*j});
        }
    } else {
        return std::nullopt;
    }
    if (!arr.is_array()) return std::nullopt;

    std::vector<RawInsight> out;
    for (const auto& e : arr) {
        if (!e.is_object()) return std::nullopt;
        auto t = text_of_element(e, {"text", "insight"});
        if (!t) return std::nullopt;
        RawInsight ins;
        ins.text = std::string(trim(*t));
        for (const char* key : {"fact_ids", "linked_fact_ids"}) {
            auto it = e.find(key);
            if (it == e.end()) continue;
            if (!it->is_array()) return std::nullopt;
            for (const auto& id : *it) {
                if (!id.is_string()) return std::nullopt;
                ins.fact_ids.push_back(id.get<std::string>());
            }
            break;
        }
        if (!ins.text.empty()) out.push_back(std::move(ins));
    }
    return out;
}

}  // namespace dualmem
