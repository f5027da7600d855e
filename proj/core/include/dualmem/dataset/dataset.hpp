#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dualmem/core/types.hpp"

namespace dualmem {

// One RoleMemoRecord per non-blank line. Every record is validated; errors
// carry the 1-based line number. Throws SchemaViolation, MissingField, IoError.
std::vector<RoleMemoRecord> parse_records(std::string_view jsonl, std::string_view source = "<memory>");
std::vector<RoleMemoRecord> load_records(const std::filesystem::path& path);

std::string serialize_records(const std::vector<RoleMemoRecord>& records);
void save_records(const std::filesystem::path& path, const std::vector<RoleMemoRecord>& records);

// Throws SchemaViolation when no record has this query id.
const RoleMemoRecord& find_record(const std::vector<RoleMemoRecord>& records, std::string_view record_id);

// One compact JSON document per line, written atomically.
template <class T>
std::string to_jsonl(const std::vector<T>& rows) {
    std::string out;
    for (const auto& row : rows) {
        out += Json(row).dump();
        out += '\n';
    }
    return out;
}

}  // namespace dualmem
