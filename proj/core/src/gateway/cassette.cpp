#include "dualmem/gateway/cassette.hpp"

#include "dualmem/error.hpp"
#include "dualmem/util/io.hpp"

namespace dualmem {

namespace fs = std::filesystem;

std::string_view to_string(CassetteMode mode) {
    switch (mode) {
        case CassetteMode::Live: return "live";
        case CassetteMode::Record: return "record";
        case CassetteMode::Replay: return "replay";
    }
    return "live";
}

Cassette::Cassette(fs::path dir, CassetteMode mode) : dir_(std::move(dir)), mode_(mode) {
    if (mode_ == CassetteMode::Live) return;
    if (dir_.empty()) fail(ErrorCode::InvalidConfig, "cassette directory is required in record/replay mode");
    if (mode_ == CassetteMode::Replay && !fs::is_directory(dir_)) {
        fail(ErrorCode::IoError, "cassette directory " + dir_.string() + " does not exist");
    }
}

fs::path Cassette::entry_path(const std::string& fingerprint) const {
    return dir_ / (fingerprint + ".json");
}

std::optional<Json> Cassette::lookup(const std::string& fingerprint) const {
    if (mode_ == CassetteMode::Live) return std::nullopt;
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(fingerprint); it != cache_.end()) return it->second["response"];

    fs::path path = entry_path(fingerprint);
    if (!fs::exists(path)) return std::nullopt;
    Json entry;
    try {
        entry = Json::parse(util::read_file(path));
    } catch (const Json::exception& e) {
        fail(ErrorCode::IoError, "corrupt cassette entry " + path.string() + ": " + e.what());
    }
    if (!entry.contains("response")) fail(ErrorCode::IoError, "cassette entry " + path.string() + " has no response");
    auto [it, _] = cache_.emplace(fingerprint, std::move(entry));
    return it->second["response"];
}

bool Cassette::store(const std::string& fingerprint, const Json& request, const Json& response) {
    if (mode_ != CassetteMode::Record) return false;
    std::lock_guard lock(mu_);
    fs::path path = entry_path(fingerprint);
    if (cache_.count(fingerprint) || fs::exists(path)) return false;
    Json entry{{"fingerprint", fingerprint}, {"request", request}, {"response", response}};
    util::write_file_atomic(path, entry.dump(2) + "\n");
    cache_.emplace(fingerprint, std::move(entry));
    ++writes_;
    return true;
}

std::size_t Cassette::writes() const {
    std::lock_guard lock(mu_);
    return writes_;
}

}  // namespace dualmem
