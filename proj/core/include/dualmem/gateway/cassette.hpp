#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "dualmem/core/types.hpp"

namespace dualmem {

enum class CassetteMode { Live, Record, Replay };

std::string_view to_string(CassetteMode mode);

// Recorded responses keyed by request fingerprint.
//
// On disk a cassette is a directory holding one file per entry,
// `<fingerprint>.json`, containing {"fingerprint", "request", "response"}
// pretty-printed with two-space indent. `request` is the canonical request the
// fingerprint was computed from; `response` is a string for chat entries and
// an array of vectors for embedding entries.
//
// Record mode never replaces an existing entry. Thread-safe.
class Cassette {
public:
    // Live: pass-through, nothing is looked up or stored.
    Cassette() = default;
    Cassette(std::filesystem::path dir, CassetteMode mode);

    Cassette(const Cassette&) = delete;
    Cassette& operator=(const Cassette&) = delete;

    CassetteMode mode() const noexcept { return mode_; }
    const std::filesystem::path& dir() const noexcept { return dir_; }

    std::optional<Json> lookup(const std::string& fingerprint) const;

    // Returns false (and leaves the file alone) if the entry already exists.
    bool store(const std::string& fingerprint, const Json& request, const Json& response);

    std::size_t writes() const;

private:
    std::filesystem::path entry_path(const std::string& fingerprint) const;

    std::filesystem::path dir_;
    CassetteMode mode_ = CassetteMode::Live;
    mutable std::mutex mu_;
    mutable std::map<std::string, Json> cache_;
    std::size_t writes_ = 0;
};

}  // namespace dualmem
