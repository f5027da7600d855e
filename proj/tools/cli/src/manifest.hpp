#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dualmem/core/types.hpp"
#include "dualmem/gateway/gateway.hpp"

namespace dualmem::cli {

// sha256 of a file; for a directory, sha256 over the sorted
// "<relative path>\t<file sha256>\n" lines of its regular files.
std::string digest_path(const std::filesystem::path& path);

// Written as <output>.manifest.json once the command finishes.
class RunManifest {
public:
    RunManifest(std::vector<std::string> command_line, std::string command);

    void set_config(Json config) { config_ = std::move(config); }
    void add_input(const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);
    void set_gateway(const GatewayStats& stats) { gateway_ = stats; }
    void add_timing(const std::string& name, double ms) { timings_[name] = ms; }

    Json to_json() const;
    void write(const std::filesystem::path& path) const;

    const std::vector<std::filesystem::path>& outputs() const noexcept { return outputs_; }

    static std::filesystem::path beside(const std::filesystem::path& output);

private:
    std::vector<std::string> command_line_;
    std::string command_;
    Json config_ = Json::object();
    std::vector<std::filesystem::path> inputs_;
    std::vector<std::filesystem::path> outputs_;
    GatewayStats gateway_;
    std::map<std::string, double> timings_;
    std::chrono::steady_clock::time_point started_;
    std::chrono::system_clock::time_point started_wall_;
};

}  // namespace dualmem::cli
