#include <algorithm>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "dualmem/cli/cli.hpp"
#include "dualmem/error.hpp"

namespace dualmem::cli {

namespace {

void print_error(std::ostream& err, std::string_view code, std::string_view detail) {
    err << Json{{"error", code}, {"detail", detail}}.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    return run_with_transport(args, out, err, nullptr);
}

int run_with_transport(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err,
                       std::shared_ptr<Transport> transport) {
    std::vector<std::string> args = raw_args;
    if (!args.empty() && (args.front() == "dualmem" || args.front() == "rolememo")) args.erase(args.begin());

    CLI::App app{"DualMem memory engine and RoleMemo toolchain", "dualmem"};
    app.set_config("--config", "", "TOML config file; command-line flags take precedence");
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", "dualmem 0.1.0");

    GlobalOptions g;
    g.command_line = raw_args;
    g.transport = std::move(transport);
    auto* record = app.add_option("--record", g.record_dir, "Record LLM calls into a cassette directory");
    auto* replay = app.add_option("--replay", g.replay_dir, "Answer LLM calls only from a cassette directory");
    record->excludes(replay);
    app.add_option("--jobs", g.jobs, "Records processed in parallel")->check(CLI::PositiveNumber);
    app.add_option("--prompts-dir", g.prompts_dir, "Directory of prompt overrides (<name>.txt)")
        ->check(CLI::ExistingDirectory);
    app.add_option("--embedder", g.embedder, "Embedding backend")->check(CLI::IsMember({"hash", "remote"}));
    app.add_option("--embed-dim", g.embed_dim, "Hash embedder dimension")->check(CLI::PositiveNumber);
    app.add_option("--chunk-tokens", g.chunk_tokens, "Chunk token budget")->check(CLI::PositiveNumber);
    app.add_option("--tokenizer", g.tokenizer, "Tokenizer name");
    app.add_option("--manifest", g.manifest, "Run manifest path (default: beside the main output)");
    app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
    app.add_option("--max-requests", g.max_requests, "Live LLM request budget (0 = unlimited)");

    BuildOptions build;
    auto* build_cmd = app.add_subcommand("build", "Build a memory bank from a conversation");
    build_cmd->add_option("--dataset", build.dataset, "RoleMemo JSONL")->required()->check(CLI::ExistingFile);
    build_cmd->add_option("--record-id", build.record_id, "Record (query id) to build");
    build_cmd->add_option("--mode", build.mode, "Bank mode")
        ->check(CLI::IsMember({"dual", "fact-only", "insight-only"}));
    build_cmd->add_option("--out", build.out, "Bank output path (with --record-id)");
    build_cmd->add_option("--out-dir", build.out_dir, "Build every record into <dir>/<record_id>.json");
    build_cmd->add_flag("--trace", build.trace, "Also write <bank>.trace.json");
    build_cmd->add_option("--prior-view-tokens", build.prior_view_tokens, "Prior memory view budget");
    build_cmd->add_option("--prior-view-top-n", build.prior_view_top_n, "Recency/similarity selection size");
    build_cmd->add_option("--max-facts", build.max_facts, "Facts kept per chunk");
    build_cmd->add_option("--max-insights", build.max_insights, "Insights kept per chunk");

    QueryOptions query;
    auto* query_cmd = app.add_subcommand("query", "Retrieve memory for a query");
    query_cmd->add_option("--bank", query.bank, "Bank file")->required()->check(CLI::ExistingFile);
    query_cmd->add_option("--query", query.query, "Query text")->required();
    query_cmd->add_option("--k", query.k, "Entries retrieved")->check(CLI::PositiveNumber);
    query_cmd->add_flag("--json", query.json, "Print the result as JSON");
    query_cmd->add_option("--out", query.out, "Also write the JSON result here");

    RespondOptions respond;
    auto* respond_cmd = app.add_subcommand("respond", "Answer a record's query in character");
    respond_cmd->add_option("--bank", respond.bank, "Bank file")->required()->check(CLI::ExistingFile);
    respond_cmd->add_option("--dataset", respond.dataset, "RoleMemo JSONL")->required()->check(CLI::ExistingFile);
    respond_cmd->add_option("--record-id", respond.record_id, "Record (query id)")->required();
    respond_cmd->add_option("--k", respond.k, "Entries retrieved")->check(CLI::PositiveNumber);
    respond_cmd->add_option("--out", respond.out, "responses.jsonl")->required();

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Recall and judge quality over a dataset");
    eval_cmd->add_option("--dataset", eval.dataset, "RoleMemo JSONL")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--bank-dir", eval.bank_dir, "Directory of <record_id>.json banks")
        ->required()
        ->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--k", eval.k, "Recall@K")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--tau", eval.tau, "Cosine threshold");
    eval_cmd->add_option("--judge-runs", eval.judge_runs, "Judge calls averaged per response (0 = no judging)")
        ->check(CLI::NonNegativeNumber);
    eval_cmd->add_option("--report", eval.report, "report.json");
    eval_cmd->add_flag("--json", eval.json, "Print the report as JSON");

    SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate over a grid of k, tau or context buckets");
    sweep_cmd->add_option("--dataset", sweep.dataset, "RoleMemo JSONL")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--bank-dir", sweep.bank_dir, "Directory of <record_id>.json banks")
        ->required()
        ->check(CLI::ExistingDirectory);
    sweep_cmd->add_option("--axis", sweep.axis, "k | tau | context")->check(CLI::IsMember({"k", "tau", "context"}));
    auto* values_opt = sweep_cmd->add_option("--values", sweep.values, "Grid values (comma separated)")
                           ->expected(0, CLI::detail::expected_max_vector_size);
    sweep_cmd->add_option("--k", sweep.k, "k when not swept")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--tau", sweep.tau, "tau when not swept");
    sweep_cmd->add_option("--judge-runs", sweep.judge_runs, "Judge calls per response")
        ->check(CLI::NonNegativeNumber);
    sweep_cmd->add_option("--out-dir", sweep.out_dir, "Reports and comparison tables")->required();

    ExportSftOptions sft;
    auto* sft_cmd = app.add_subcommand("export-sft", "Export SFT pairs");
    sft_cmd->add_option("--dataset", sft.dataset, "RoleMemo JSONL")->required()->check(CLI::ExistingFile);
    sft_cmd->add_option("--negative-ratio", sft.negative_ratio, "Null negatives per positive");
    sft_cmd->add_option("--out", sft.out, "sft.jsonl")->required();

    ExportRlOptions rl;
    auto* rl_cmd = app.add_subcommand("export-rl", "Export RL trajectories with rewards and advantages");
    rl_cmd->add_option("--runs", rl.runs, "Rollout artifacts JSONL")->required()->check(CLI::ExistingFile);
    rl_cmd->add_option("--trainer-config", rl.trainer_config, "Trainer config JSON")->check(CLI::ExistingFile);
    rl_cmd->add_option("--out", rl.out, "rl.jsonl")->required();

    ValidateOptions validate;
    auto* validate_cmd = app.add_subcommand("validate", "Validate a RoleMemo dataset");
    validate_cmd->add_option("dataset", validate.dataset, "RoleMemo JSONL")->required()->check(CLI::ExistingFile);

    QaOptions qa;
    auto* qa_cmd = app.add_subcommand("qa", "Run dataset QA checks");
    qa_cmd->add_option("dataset", qa.dataset, "RoleMemo JSONL")->required()->check(CLI::ExistingFile);
    qa_cmd->add_option("--checks", qa.checks, "difficulty,memory-necessity,insight-specificity,safety or all");
    qa_cmd->add_option("--out", qa.out, "Verdicts JSONL (default: stdout)");

    auto* config_cmd = app.add_subcommand("config", "Print the effective configuration");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            app.exit(e, out, err);
            return kExitOk;
        }
        app.exit(e, out, err);
        return kExitUsage;
    }
    sweep.values_given = values_opt->count() > 0;

    spdlog::set_level(spdlog::level::from_str(g.log_level));
    try {
        if (*build_cmd) return cmd_build(g, build, out);
        if (*query_cmd) return cmd_query(g, query, out);
        if (*respond_cmd) return cmd_respond(g, respond, out);
        if (*eval_cmd) return cmd_eval(g, eval, out);
        if (*sweep_cmd) return cmd_sweep(g, sweep, out);
        if (*sft_cmd) return cmd_export_sft(g, sft, out);
        if (*rl_cmd) return cmd_export_rl(g, rl, out);
        if (*validate_cmd) return cmd_validate(g, validate, out);
        if (*qa_cmd) return cmd_qa(g, qa, out);
        if (*config_cmd) return cmd_config(g, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.message << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        print_error(err, to_string(e.code()), e.detail());
        return kExitDomainError;
    } catch (const std::exception& e) {
        print_error(err, "Internal", e.what());
        return kExitDomainError;
    }
    return kExitUsage;
}

int main_entry(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace dualmem::cli
