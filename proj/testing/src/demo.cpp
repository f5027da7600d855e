#include "dualmem/testing/demo.hpp"

#include <algorithm>

#include "dualmem/dataset/dataset.hpp"

namespace dualmem::testing {

namespace fs = std::filesystem;

namespace {

std::string trimmed(std::string s) {
    s.erase(0, s.find_first_not_of(" \t"));
    s.erase(s.find_last_not_of(" \t") + 1);
    return s;
}

}  // namespace

Handler oracle_insight_handler(std::vector<RoleMemoRecord> records, ScriptOptions options) {
    return [records = std::move(records), options](const ChatCall& call) -> std::string {
        auto fresh = parse_entry_lines(call.section("New facts:"));
        auto prior = parse_entry_lines(call.section("Earlier memory:"));
        auto find = [&](const std::vector<ParsedEntryLine>& lines, const std::string& text) -> const ParsedEntryLine* {
            for (const auto& l : lines) {
                if (!l.insight && trimmed(l.text) == trimmed(text)) return &l;
            }
            return nullptr;
        };

        Json out = Json::array();
        for (const auto& r : records) {
            std::vector<std::string> ids;
            bool any_fresh = false;
            for (const auto& f : r.fragments) {
                const ParsedEntryLine* hit = find(fresh, f);
                any_fresh = any_fresh || hit;
                if (!hit) hit = find(prior, f);
                if (!hit) break;
                ids.push_back(hit->id);
            }
            if (ids.size() == r.fragments.size() && any_fresh) {
                out.push_back(Json{{"text", r.gt_insight}, {"fact_ids", ids}});
            }
        }
        if (out.empty()) return heuristic_reply(call, options);
        return out.dump();
    };
}

std::shared_ptr<ScriptedTransport> demo_transport(const std::vector<RoleMemoRecord>& records) {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->set_handler(Stage::InsightDerivation, oracle_insight_handler(records));
    return transport;
}

DemoPaths demo_paths(const fs::path& demo_dir) {
    return {demo_dir / "rolememo_demo.jsonl", demo_dir / "demo.toml", demo_dir / "cassette"};
}

std::vector<std::vector<std::string>> demo_pipeline(const DemoPaths& paths, const fs::path& work_dir) {
    const auto records = load_records(paths.dataset);
    const std::string d = paths.dataset.string();
    const std::string cfg = paths.config.string();
    auto w = [&](const std::string& rel) { return (work_dir / rel).string(); };
    const RoleMemoRecord& first = records.front();

    return {
        {"--config", cfg, "build", "--dataset", d, "--mode", "dual", "--out-dir", w("banks"), "--trace"},
        {"--config", cfg, "build", "--dataset", d, "--mode", "fact-only", "--out-dir", w("banks-fact-only")},
        {"--config", cfg, "query", "--bank", w("banks/" + first.record_id() + ".json"), "--query", first.query.text,
         "--k", "10", "--json", "--out", w("query.json")},
        {"--config", cfg, "respond", "--bank", w("banks/" + first.record_id() + ".json"), "--dataset", d,
         "--record-id", first.record_id(), "--out", w("responses.jsonl")},
        {"--config", cfg, "eval", "--dataset", d, "--bank-dir", w("banks"), "--k", "10", "--tau", "0.7",
         "--judge-runs", "3", "--report", w("report.json")},
        {"--config", cfg, "eval", "--dataset", d, "--bank-dir", w("banks-fact-only"), "--k", "10", "--tau", "0.7",
         "--judge-runs", "0", "--report", w("report-fact-only.json")},
        {"rolememo", "--config", cfg, "qa", d, "--checks", "all", "--out", w("qa.jsonl")},
    };
}

std::vector<std::string> with_global_flags(std::vector<std::string> args, const std::vector<std::string>& flags) {
    auto at = args.begin();
    if (at != args.end() && (*at == "dualmem" || *at == "rolememo")) ++at;
    args.insert(at, flags.begin(), flags.end());
    return args;
}

std::vector<std::string> demo_outputs() {
    return {"banks/demo-q1.json",
            "banks/demo-q2.json",
            "banks-fact-only/demo-q1.json",
            "banks-fact-only/demo-q2.json",
            "query.json",
            "responses.jsonl",
            "report.json",
            "report-fact-only.json",
            "qa.jsonl"};
}

}  // namespace dualmem::testing
