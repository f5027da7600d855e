#pragma once

// Internal helpers for strict field extraction from JSON documents.

#include <initializer_list>
#include <string>
#include <string_view>

#include "dualmem/core/types.hpp"
#include "dualmem/error.hpp"

namespace dualmem::detail {

inline const Json& require(const Json& j, std::string_view key) {
    if (!j.is_object()) fail(ErrorCode::SchemaViolation, "expected object while reading '" + std::string(key) + "'");
    auto it = j.find(key);
    if (it == j.end()) fail(ErrorCode::SchemaViolation, "missing field '" + std::string(key) + "'");
    return *it;
}

inline std::string require_string(const Json& j, std::string_view key) {
    const Json& v = require(j, key);
    if (!v.is_string()) fail(ErrorCode::SchemaViolation, "field '" + std::string(key) + "' must be a string");
    return v.get<std::string>();
}

inline std::string require_nonempty(const Json& j, std::string_view key) {
    std::string s = require_string(j, key);
    if (s.empty()) fail(ErrorCode::SchemaViolation, "field '" + std::string(key) + "' must be non-empty");
    return s;
}

inline std::size_t require_index(const Json& j, std::string_view key) {
    const Json& v = require(j, key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        fail(ErrorCode::SchemaViolation, "field '" + std::string(key) + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

// Copies every member of `j` whose key is not listed in `known`.
inline Json collect_extra(const Json& j, std::initializer_list<std::string_view> known) {
    Json extra = Json::object();
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool is_known = false;
        for (auto k : known) {
            if (it.key() == k) {
                is_known = true;
                break;
            }
        }
        if (!is_known) extra[it.key()] = it.value();
    }
    return extra;
}

inline Json with_extra(const Json& extra) {
    return extra.is_object() ? extra : Json::object();
}

}  // namespace dualmem::detail
