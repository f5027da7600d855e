#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dualmem/core/types.hpp"
#include "dualmem/gateway/transport.hpp"

namespace dualmem::cli {

namespace fs = std::filesystem;

struct GlobalOptions {
    std::vector<std::string> command_line;
    std::string record_dir;
    std::string replay_dir;
    std::size_t jobs = 1;
    std::string prompts_dir;
    std::string embedder = "hash";
    std::size_t embed_dim = 64;
    std::size_t chunk_tokens = 2048;
    std::string tokenizer = "heuristic";
    std::string manifest;
    std::string log_level = "warn";
    std::size_t max_requests = 0;  // 0 = unlimited
    // Replaces the HTTP transport (tests and fixture generation).
    std::shared_ptr<Transport> transport;
};

struct BuildOptions {
    std::string dataset;
    std::string record_id;
    std::string mode = "dual";
    std::string out;
    std::string out_dir;
    bool trace = false;
    std::size_t prior_view_tokens = 1024;
    std::size_t prior_view_top_n = 10;
    std::size_t max_facts = 8;
    std::size_t max_insights = 4;
};

struct QueryOptions {
    std::string bank;
    std::string query;
    std::size_t k = 10;
    bool json = false;
    std::string out;
};

struct RespondOptions {
    std::string bank;
    std::string dataset;
    std::string record_id;
    std::size_t k = 10;
    std::string out;
};

struct EvalOptions {
    std::string dataset;
    std::string bank_dir;
    std::size_t k = 10;
    double tau = 0.7;
    int judge_runs = 3;
    std::string report;
    bool json = false;
};

struct SweepOptions {
    std::string dataset;
    std::string bank_dir;
    std::string axis = "k";
    std::vector<std::string> values;
    bool values_given = false;
    std::size_t k = 10;
    double tau = 0.7;
    int judge_runs = 0;
    std::string out_dir;
};

struct ExportSftOptions {
    std::string dataset;
    double negative_ratio = 1.0;
    std::string out;
};

struct ExportRlOptions {
    std::string runs;
    std::string trainer_config;
    std::string out;
};

struct ValidateOptions {
    std::string dataset;
};

struct QaOptions {
    std::string dataset;
    std::string checks = "difficulty";
    std::string out;
};

// Thrown for argument combinations CLI11 cannot express; exit code 2.
struct UsageError {
    std::string message;
};

int cmd_build(const GlobalOptions& g, const BuildOptions& o, std::ostream& out);
int cmd_query(const GlobalOptions& g, const QueryOptions& o, std::ostream& out);
int cmd_respond(const GlobalOptions& g, const RespondOptions& o, std::ostream& out);
int cmd_eval(const GlobalOptions& g, const EvalOptions& o, std::ostream& out);
int cmd_sweep(const GlobalOptions& g, const SweepOptions& o, std::ostream& out);
int cmd_export_sft(const GlobalOptions& g, const ExportSftOptions& o, std::ostream& out);
int cmd_export_rl(const GlobalOptions& g, const ExportRlOptions& o, std::ostream& out);
int cmd_validate(const GlobalOptions& g, const ValidateOptions& o, std::ostream& out);
int cmd_qa(const GlobalOptions& g, const QaOptions& o, std::ostream& out);
int cmd_config(const GlobalOptions& g, std::ostream& out);

}  // namespace dualmem::cli
