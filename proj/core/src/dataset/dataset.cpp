#include "dualmem/dataset/dataset.hpp"

#include "dualmem/error.hpp"
#include "dualmem/util/io.hpp"

namespace dualmem {

std::vector<RoleMemoRecord> parse_records(std::string_view jsonl, std::string_view source) {
    std::vector<RoleMemoRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= jsonl.size()) {
        std::size_t end = jsonl.find('\n', pos);
        if (end == std::string_view::npos) end = jsonl.size();
        std::string_view line = jsonl.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        const std::string where = std::string(source) + ":" + std::to_string(line_no);
        try {
            Json j = Json::parse(line);
            RoleMemoRecord record = j.get<RoleMemoRecord>();
            validate_record(record);
            records.push_back(std::move(record));
        } catch (const Error& e) {
            throw e.with_context(where);
        } catch (const Json::exception& e) {
            fail(ErrorCode::SchemaViolation, where + ": " + e.what());
        }
    }
    return records;
}

std::vector<RoleMemoRecord> load_records(const std::filesystem::path& path) {
    return parse_records(util::read_file(path), path.string());
}

std::string serialize_records(const std::vector<RoleMemoRecord>& records) {
    return to_jsonl(records);
}

void save_records(const std::filesystem::path& path, const std::vector<RoleMemoRecord>& records) {
    util::write_file_atomic(path, serialize_records(records));
}

const RoleMemoRecord& find_record(const std::vector<RoleMemoRecord>& records, std::string_view record_id) {
    for (const auto& r : records) {
        if (r.record_id() == record_id) return r;
    }
    fail(ErrorCode::SchemaViolation, "no record with id '" + std::string(record_id) + "'");
}

}  // namespace dualmem
