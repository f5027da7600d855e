#include "manifest.hpp"

#include <algorithm>
#include <ctime>

#include "dualmem/util/io.hpp"

namespace dualmem::cli {

namespace fs = std::filesystem;

std::string digest_path(const fs::path& path) {
    if (!fs::is_directory(path)) return util::sha256_file(path);
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& e : fs::recursive_directory_iterator(path)) {
        if (!e.is_regular_file()) continue;
        files.emplace_back(fs::relative(e.path(), path).generic_string(), util::sha256_file(e.path()));
    }
    std::sort(files.begin(), files.end());
    std::string lines;
    for (const auto& [rel, sha] : files) lines += rel + "\t" + sha + "\n";
    return util::sha256_hex(lines);
}

RunManifest::RunManifest(std::vector<std::string> command_line, std::string command)
    : command_line_(std::move(command_line)),
      command_(std::move(command)),
      started_(std::chrono::steady_clock::now()),
      started_wall_(std::chrono::system_clock::now()) {}

void RunManifest::add_input(const fs::path& path) {
    if (std::find(inputs_.begin(), inputs_.end(), path) == inputs_.end()) inputs_.push_back(path);
}

void RunManifest::add_output(const fs::path& path) {
    if (std::find(outputs_.begin(), outputs_.end(), path) == outputs_.end()) outputs_.push_back(path);
}

Json RunManifest::to_json() const {
    auto digests = [](const std::vector<fs::path>& paths) {
        Json out = Json::object();
        for (const auto& p : paths) out[p.string()] = fs::exists(p) ? Json(digest_path(p)) : Json(nullptr);
        return out;
    };
    const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started_);
    std::time_t t = std::chrono::system_clock::to_time_t(started_wall_);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm);

    Json timings = Json::object();
    for (const auto& [k, v] : timings_) timings[k] = v;
    timings["total_ms"] = elapsed.count();
    timings["started_at"] = stamp;

    return Json{{"command", command_},
                {"command_line", command_line_},
                {"config", config_},
                {"inputs", digests(inputs_)},
                {"outputs", digests(outputs_)},
                {"timings", timings},
                {"gateway",
                 {{"requests", gateway_.requests},
                  {"cassette_hits", gateway_.cassette_hits},
                  {"network_calls", gateway_.network_calls},
                  {"cassette_writes", gateway_.cassette_writes}}}};
}

void RunManifest::write(const fs::path& path) const {
    util::write_file_atomic(path, to_json().dump(2) + "\n");
}

fs::path RunManifest::beside(const fs::path& output) {
    fs::path p = output;
    if (!p.has_filename()) p = p.parent_path();
    return fs::path(p.string() + ".manifest.json");
}

}  // namespace dualmem::cli
