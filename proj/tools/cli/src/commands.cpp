#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "dualmem/chunker/chunker.hpp"
#include "dualmem/construction/builder.hpp"
#include "dualmem/dataset/dataset.hpp"
#include "dualmem/dataset/export.hpp"
#include "dualmem/dataset/qa.hpp"
#include "dualmem/error.hpp"
#include "dualmem/evaluation/report.hpp"
#include "dualmem/gateway/embedder.hpp"
#include "dualmem/gateway/gateway.hpp"
#include "dualmem/responder/responder.hpp"
#include "dualmem/retrieval/retrieval.hpp"
#include "dualmem/util/io.hpp"
#include "manifest.hpp"

namespace dualmem::cli {

namespace {

struct Runtime {
    std::shared_ptr<Gateway> gateway;
    std::unique_ptr<Embedder> embedder;
    PromptLibrary prompts;
    std::unique_ptr<Tokenizer> tokenizer;
};

Runtime make_runtime(const GlobalOptions& g) {
    Runtime rt;
    std::shared_ptr<Cassette> cassette;
    if (!g.replay_dir.empty()) {
        cassette = std::make_shared<Cassette>(g.replay_dir, CassetteMode::Replay);
    } else if (!g.record_dir.empty()) {
        cassette = std::make_shared<Cassette>(g.record_dir, CassetteMode::Record);
    } else {
        cassette = std::make_shared<Cassette>();
    }
    GatewayConfig config = GatewayConfig::from_env();
    if (g.max_requests > 0) config.max_requests = g.max_requests;
    if (g.transport) {
        if (config.llm_base_url.empty()) config.llm_base_url = "http://transport.invalid/v1";
        if (config.api_key.empty()) config.api_key = "unused";
        config.initial_backoff = std::chrono::milliseconds(0);
    }
    rt.gateway = std::make_shared<Gateway>(config, cassette, g.replay_dir.empty() ? g.transport : nullptr);

    if (g.embedder == "hash") {
        rt.embedder = std::make_unique<HashEmbedder>(g.embed_dim);
    } else if (g.embedder == "remote") {
        rt.embedder = std::make_unique<GatewayEmbedder>(rt.gateway);
    } else {
        throw UsageError{"--embedder must be 'hash' or 'remote'"};
    }
    rt.prompts = g.prompts_dir.empty() ? PromptLibrary::defaults() : PromptLibrary::with_overrides(g.prompts_dir);
    rt.tokenizer = make_tokenizer(g.tokenizer);
    return rt;
}

Json global_config(const GlobalOptions& g) {
    std::string mode = !g.replay_dir.empty() ? "replay" : !g.record_dir.empty() ? "record" : "live";
    return Json{{"cassette_mode", mode},
                {"cassette_dir", !g.replay_dir.empty() ? g.replay_dir : g.record_dir},
                {"jobs", g.jobs},
                {"prompts_dir", g.prompts_dir},
                {"embedder", g.embedder},
                {"embed_dim", g.embed_dim},
                {"chunk_tokens", g.chunk_tokens},
                {"tokenizer", g.tokenizer},
                {"max_requests", g.max_requests}};
}

// Runs fn(0..n-1) on up to `jobs` threads; the first exception (by index) is
// rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, n));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

void finish(RunManifest& manifest, const GlobalOptions& g, const Runtime* rt, const fs::path& default_path) {
    if (rt) manifest.set_gateway(rt->gateway->stats());
    if (!g.manifest.empty()) {
        manifest.write(g.manifest);
    } else if (!default_path.empty()) {
        manifest.write(RunManifest::beside(default_path));
    }
}

void add_cassette_input(RunManifest& manifest, const GlobalOptions& g) {
    if (!g.replay_dir.empty()) manifest.add_input(g.replay_dir);
}

fs::path bank_path(const fs::path& dir, const RoleMemoRecord& record) {
    return dir / (record.record_id() + ".json");
}

std::string fixed(double v, int digits = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::vector<QueryEval> evaluate_all(const std::vector<RoleMemoRecord>& records, const fs::path& bank_dir,
                                    const EvalConfig& config, Runtime& rt, std::size_t jobs, RunManifest& manifest) {
    std::vector<MemoryBank> banks(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        fs::path p = bank_path(bank_dir, records[i]);
        if (!fs::exists(p)) fail(ErrorCode::MissingArtifact, records[i].record_id() + ": no bank at " + p.string());
        manifest.add_input(p);
        banks[i] = load_bank(p.string());
    }
    std::vector<QueryEval> results(records.size());
    parallel_for(records.size(), jobs, [&](std::size_t i) {
        try {
            results[i] = evaluate_record(records[i], banks[i], *rt.embedder, config, rt.gateway.get(), rt.prompts);
        } catch (const Error& e) {
            throw e.with_context("record " + records[i].record_id());
        }
    });
    return results;
}

void print_aggregate(std::ostream& out, const std::string& label, const EvalAggregate& a) {
    out << std::left << std::setw(28) << label << " n=" << a.n_queries << "  fact_recall=" << fixed(a.fact_recall)
        << "  insight_recall=" << fixed(a.insight_recall);
    if (a.quality) out << "  quality=" << fixed(a.quality->mean(), 3);
    out << "\n";
}

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& item : raw) {
        std::size_t pos = 0;
        while (pos <= item.size()) {
            std::size_t end = item.find(',', pos);
            if (end == std::string::npos) end = item.size();
            std::string v = item.substr(pos, end - pos);
            v.erase(0, v.find_first_not_of(' '));
            v.erase(v.find_last_not_of(' ') + 1);
            if (!v.empty()) out.push_back(v);
            pos = end + 1;
        }
    }
    return out;
}

}  // namespace

int cmd_build(const GlobalOptions& g, const BuildOptions& o, std::ostream& out) {
    if (o.record_id.empty() == o.out_dir.empty()) {
        throw UsageError{"build needs either --record-id with --out, or --out-dir for every record"};
    }
    if (!o.record_id.empty() && o.out.empty()) throw UsageError{"--record-id needs --out"};

    RunManifest manifest(g.command_line, "build");
    Runtime rt = make_runtime(g);
    BuildConfig config;
    config.mode = bank_mode_from_string(o.mode);
    config.chunk_budget = g.chunk_tokens;
    config.prior_view_budget = o.prior_view_tokens;
    config.prior_view_top_n = o.prior_view_top_n;
    config.max_facts_per_chunk = o.max_facts;
    config.max_insights_per_chunk = o.max_insights;
    config.validate();

    Json snapshot = global_config(g);
    snapshot["build"] = config;
    manifest.set_config(snapshot);
    manifest.add_input(o.dataset);
    add_cassette_input(manifest, g);

    auto records = load_records(o.dataset);
    std::vector<const RoleMemoRecord*> targets;
    std::vector<fs::path> outputs;
    if (!o.record_id.empty()) {
        targets.push_back(&find_record(records, o.record_id));
        outputs.emplace_back(o.out);
    } else {
        for (const auto& r : records) {
            targets.push_back(&r);
            outputs.push_back(bank_path(o.out_dir, r));
        }
    }

    MemoryConstructor constructor(*rt.gateway, *rt.embedder, config, rt.prompts, rt.tokenizer.get());
    std::vector<BuildResult> results(targets.size());
    const auto t0 = std::chrono::steady_clock::now();
    parallel_for(targets.size(), g.jobs, [&](std::size_t i) {
        try {
            results[i] = constructor.build(targets[i]->conversation, targets[i]->persona);
        } catch (const Error& e) {
            throw e.with_context("record " + targets[i]->record_id());
        }
    });
    manifest.add_timing("build_ms",
                        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());

    for (std::size_t i = 0; i < targets.size(); ++i) {
        save_bank(results[i].bank, outputs[i].string());
        manifest.add_output(outputs[i]);
        if (o.trace) {
            fs::path trace_path = outputs[i].string() + ".trace.json";
            util::write_file_atomic(trace_path, Json(results[i].trace).dump(2) + "\n");
            manifest.add_output(trace_path);
        }
        out << "built " << targets[i]->record_id() << ": " << results[i].bank.facts().size() << " facts, "
            << results[i].bank.insights().size() << " insights, " << results[i].bank.step_count() << " steps -> "
            << outputs[i].string() << "\n";
    }
    finish(manifest, g, &rt, o.record_id.empty() ? fs::path(o.out_dir) : fs::path(o.out));
    return 0;
}

int cmd_query(const GlobalOptions& g, const QueryOptions& o, std::ostream& out) {
    RunManifest manifest(g.command_line, "query");
    Runtime rt = make_runtime(g);
    Json snapshot = global_config(g);
    snapshot["query"] = {{"k", o.k}, {"query", o.query}};
    manifest.set_config(snapshot);
    manifest.add_input(o.bank);

    MemoryBank bank = load_bank(o.bank);
    MemoryIndex index = build_index(bank, *rt.embedder);
    RetrievalResult result = retrieve(index, o.query, o.k, *rt.embedder);

    if (o.json) {
        out << Json(result).dump(2) << "\n";
    } else if (result.empty()) {
        out << kNoMemoryMarker << "\n";
    } else {
        for (const auto& hit : result.primary_hits) {
            out << fixed(hit.score) << "  " << render_entry_line(hit.kind, hit.entry_id, hit.text) << "\n";
        }
        for (const auto& id : result.expanded_fact_ids) out << "  +linked  " << id << "\n";
    }
    if (!o.out.empty()) {
        util::write_file_atomic(o.out, Json(result).dump(2) + "\n");
        manifest.add_output(o.out);
    }
    finish(manifest, g, &rt, o.out);
    return 0;
}

int cmd_respond(const GlobalOptions& g, const RespondOptions& o, std::ostream& out) {
    RunManifest manifest(g.command_line, "respond");
    Runtime rt = make_runtime(g);
    Json snapshot = global_config(g);
    snapshot["respond"] = {{"k", o.k}, {"record_id", o.record_id}};
    manifest.set_config(snapshot);
    manifest.add_input(o.bank);
    manifest.add_input(o.dataset);
    add_cassette_input(manifest, g);

    auto records = load_records(o.dataset);
    const RoleMemoRecord& record = find_record(records, o.record_id);
    MemoryBank bank = load_bank(o.bank);
    MemoryIndex index = build_index(bank, *rt.embedder);
    RetrievalResult retrieval = retrieve(index, record.query.text, o.k, *rt.embedder);
    ResponseRecord response = respond(record.persona, record.query, retrieval, *rt.gateway, rt.prompts);

    util::write_file_atomic(o.out, Json(response).dump() + "\n");
    manifest.add_output(o.out);
    out << response.response_text << "\n";
    finish(manifest, g, &rt, o.out);
    return 0;
}

int cmd_eval(const GlobalOptions& g, const EvalOptions& o, std::ostream& out) {
    RunManifest manifest(g.command_line, "eval");
    Runtime rt = make_runtime(g);
    EvalConfig config;
    config.recall.k = o.k;
    config.recall.tau = o.tau;
    config.judge_runs = o.judge_runs;
    config.validate();

    Json snapshot = global_config(g);
    snapshot["eval"] = config;
    manifest.set_config(snapshot);
    manifest.add_input(o.dataset);
    add_cassette_input(manifest, g);

    auto records = load_records(o.dataset);
    const auto t0 = std::chrono::steady_clock::now();
    EvalReport report = aggregate_report(evaluate_all(records, o.bank_dir, config, rt, g.jobs, manifest), config);
    manifest.add_timing("eval_ms",
                        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());

    const std::string text = Json(report).dump(2) + "\n";
    if (!o.report.empty()) {
        util::write_file_atomic(o.report, text);
        manifest.add_output(o.report);
    }
    if (o.json) {
        out << text;
    } else {
        print_aggregate(out, "overall", report.overall);
        for (const auto& [type, agg] : report.per_type) {
            if (agg) print_aggregate(out, std::string(to_string(type)), *agg);
        }
    }
    finish(manifest, g, &rt, o.report);
    return 0;
}

int cmd_sweep(const GlobalOptions& g, const SweepOptions& o, std::ostream& out) {
    std::vector<std::string> values = split_list(o.values);
    if (!o.values_given) {
        if (o.axis == "k") values = {"5", "10", "20"};
        if (o.axis == "tau") values = {"0.65", "0.70", "0.75"};
        if (o.axis == "context") values = {"32000", "64000", "128000", "256000"};
    }
    if (values.empty()) throw UsageError{"sweep grid is empty"};
    if (o.axis != "k" && o.axis != "tau" && o.axis != "context") {
        throw UsageError{"--axis must be k, tau or context"};
    }

    RunManifest manifest(g.command_line, "sweep");
    Runtime rt = make_runtime(g);
    auto records = load_records(o.dataset);
    manifest.add_input(o.dataset);
    add_cassette_input(manifest, g);

    std::vector<std::size_t> conv_tokens;
    for (const auto& r : records) {
        std::size_t n = 0;
        for (const auto& t : r.conversation.turns) n += turn_tokens(t, *rt.tokenizer);
        conv_tokens.push_back(n);
    }

    Json rows = Json::array();
    std::string csv = "axis,value,n_queries,fact_recall,insight_recall,quality_mean,report\n";
    std::size_t prev_bucket = 0;
    for (const auto& value : values) {
        EvalConfig config;
        config.recall.k = o.k;
        config.recall.tau = o.tau;
        config.judge_runs = o.judge_runs;
        std::vector<RoleMemoRecord> subset;
        try {
            if (o.axis == "k") {
                config.recall.k = std::stoul(value);
                subset = records;
            } else if (o.axis == "tau") {
                config.recall.tau = std::stod(value);
                subset = records;
            } else {
                const std::size_t bound = std::stoul(value);
                for (std::size_t i = 0; i < records.size(); ++i) {
                    if (conv_tokens[i] > prev_bucket && conv_tokens[i] <= bound) subset.push_back(records[i]);
                }
                prev_bucket = bound;
            }
        } catch (const std::logic_error&) {
            throw UsageError{"bad " + o.axis + " value '" + value + "'"};
        }
        config.validate();

        Json row{{"axis", o.axis}, {"value", value}, {"n_queries", subset.size()}};
        fs::path report_path = fs::path(o.out_dir) / ("report_" + o.axis + "_" + value + ".json");
        if (subset.empty()) {
            row["fact_recall"] = nullptr;
            row["insight_recall"] = nullptr;
            row["quality_mean"] = nullptr;
            row["report"] = nullptr;
            csv += o.axis + "," + value + ",0,,,,\n";
        } else {
            EvalReport report =
                aggregate_report(evaluate_all(subset, o.bank_dir, config, rt, g.jobs, manifest), config);
            util::write_file_atomic(report_path, Json(report).dump(2) + "\n");
            manifest.add_output(report_path);
            row["fact_recall"] = report.overall.fact_recall;
            row["insight_recall"] = report.overall.insight_recall;
            row["quality_mean"] = report.overall.quality ? Json(report.overall.quality->mean()) : Json(nullptr);
            row["report"] = report_path.filename().string();
            csv += o.axis + "," + value + "," + std::to_string(subset.size()) + "," +
                   fixed(report.overall.fact_recall, 6) + "," + fixed(report.overall.insight_recall, 6) + "," +
                   (report.overall.quality ? fixed(report.overall.quality->mean(), 6) : "") + "," +
                   report_path.filename().string() + "\n";
        }
        out << o.axis << "=" << value << "  n=" << subset.size();
        if (!row["fact_recall"].is_null()) {
            out << "  fact_recall=" << fixed(row["fact_recall"].get<double>())
                << "  insight_recall=" << fixed(row["insight_recall"].get<double>());
        }
        out << "\n";
        rows.push_back(std::move(row));
    }

    Json snapshot = global_config(g);
    snapshot["sweep"] = {{"axis", o.axis}, {"values", values}, {"k", o.k}, {"tau", o.tau}, {"judge_runs", o.judge_runs}};
    manifest.set_config(snapshot);

    const fs::path csv_path = fs::path(o.out_dir) / "comparison.csv";
    const fs::path json_path = fs::path(o.out_dir) / "comparison.json";
    util::write_file_atomic(csv_path, csv);
    util::write_file_atomic(json_path, Json{{"axis", o.axis}, {"rows", rows}}.dump(2) + "\n");
    manifest.add_output(csv_path);
    manifest.add_output(json_path);
    finish(manifest, g, &rt, json_path);
    return 0;
}

int cmd_export_sft(const GlobalOptions& g, const ExportSftOptions& o, std::ostream& out) {
    RunManifest manifest(g.command_line, "export-sft");
    auto tokenizer = make_tokenizer(g.tokenizer);
    PromptLibrary prompts =
        g.prompts_dir.empty() ? PromptLibrary::defaults() : PromptLibrary::with_overrides(g.prompts_dir);
    SftConfig config;
    config.chunk_budget = g.chunk_tokens;
    config.negative_ratio = o.negative_ratio;
    config.validate();

    Json snapshot = global_config(g);
    snapshot["export_sft"] = {{"chunk_budget", config.chunk_budget}, {"negative_ratio", config.negative_ratio}};
    manifest.set_config(snapshot);
    manifest.add_input(o.dataset);

    auto pairs = export_sft(load_records(o.dataset), config, *tokenizer, prompts);
    util::write_file_atomic(o.out, to_jsonl(pairs));
    manifest.add_output(o.out);

    std::size_t fact = 0, positive = 0, negative = 0;
    for (const auto& p : pairs) {
        if (p.kind == SftKind::FactStage) ++fact;
        else if (p.target) ++positive;
        else ++negative;
    }
    out << pairs.size() << " pairs: " << fact << " fact_stage, " << positive << " insight_stage, " << negative
        << " null insight_stage -> " << o.out << "\n";
    finish(manifest, g, nullptr, o.out);
    return 0;
}

int cmd_export_rl(const GlobalOptions& g, const ExportRlOptions& o, std::ostream& out) {
    RunManifest manifest(g.command_line, "export-rl");
    TrainerConfig trainer;
    if (!o.trainer_config.empty()) {
        trainer = Json::parse(util::read_file(o.trainer_config)).get<TrainerConfig>();
        manifest.add_input(o.trainer_config);
    }
    Json snapshot = global_config(g);
    snapshot["trainer"] = trainer;
    manifest.set_config(snapshot);
    manifest.add_input(o.runs);

    std::vector<RolloutArtifacts> runs;
    const std::string text = util::read_file(o.runs);
    std::istringstream lines(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            runs.push_back(Json::parse(line).get<RolloutArtifacts>());
        } catch (const Json::exception& e) {
            fail(ErrorCode::SchemaViolation, o.runs + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    auto logs = export_rl(runs, trainer);
    util::write_file_atomic(o.out, to_jsonl(logs));
    manifest.add_output(o.out);
    out << logs.size() << " trajectories -> " << o.out << "\n";
    finish(manifest, g, nullptr, o.out);
    return 0;
}

int cmd_validate(const GlobalOptions& g, const ValidateOptions& o, std::ostream& out) {
    RunManifest manifest(g.command_line, "validate");
    manifest.set_config(global_config(g));
    manifest.add_input(o.dataset);
    auto records = load_records(o.dataset);
    out << o.dataset << ": " << records.size() << " valid records\n";
    finish(manifest, g, nullptr, {});
    return 0;
}

int cmd_qa(const GlobalOptions& g, const QaOptions& o, std::ostream& out) {
    RunManifest manifest(g.command_line, "qa");
    const std::vector<QaCheck> checks = parse_qa_checks(o.checks);
    Runtime rt = make_runtime(g);
    Json snapshot = global_config(g);
    Json names = Json::array();
    for (auto c : checks) names.push_back(std::string(to_string(c)));
    snapshot["qa"] = {{"checks", names}};
    manifest.set_config(snapshot);
    manifest.add_input(o.dataset);
    add_cassette_input(manifest, g);

    auto records = load_records(o.dataset);
    std::vector<std::vector<QaVerdict>> verdicts(records.size());
    parallel_for(records.size(), g.jobs, [&](std::size_t i) {
        for (QaCheck c : checks) {
            switch (c) {
                case QaCheck::DifficultyControl: verdicts[i].push_back(check_difficulty(records[i])); break;
                case QaCheck::MemoryNecessity:
                    verdicts[i].push_back(check_memory_necessity(records[i], *rt.gateway, *rt.gateway, rt.prompts));
                    break;
                case QaCheck::InsightSpecificity:
                    verdicts[i].push_back(check_insight_specificity(records[i], *rt.gateway, rt.prompts));
                    break;
                case QaCheck::Safety: verdicts[i].push_back(check_safety(records[i], *rt.gateway, rt.prompts)); break;
            }
        }
    });

    std::string jsonl;
    std::map<std::string, std::pair<std::size_t, std::size_t>> tally;
    for (std::size_t i = 0; i < records.size(); ++i) {
        jsonl += Json{{"record_id", records[i].record_id()}, {"verdicts", verdicts[i]}}.dump() + "\n";
        for (const auto& v : verdicts[i]) {
            auto& [pass, total] = tally[std::string(to_string(v.check))];
            pass += v.passed ? 1 : 0;
            ++total;
        }
    }
    if (o.out.empty()) {
        out << jsonl;
    } else {
        util::write_file_atomic(o.out, jsonl);
        manifest.add_output(o.out);
        for (const auto& [name, counts] : tally) {
            out << name << ": " << counts.first << "/" << counts.second << " passed\n";
        }
    }
    finish(manifest, g, &rt, o.out);
    return 0;
}

int cmd_config(const GlobalOptions& g, std::ostream& out) {
    Json snapshot = global_config(g);
    snapshot["build"] = BuildConfig{};
    snapshot["eval"] = EvalConfig{};
    snapshot["trainer"] = TrainerConfig{};
    out << snapshot.dump(2) << "\n";
    return 0;
}

}  // namespace dualmem::cli
