#include "dualmem/dataset/export.hpp"

#include <cmath>
#include <map>

#include "dualmem/error.hpp"
#include "dualmem/retrieval/retrieval.hpp"

namespace dualmem {

namespace {

Json messages_json(const std::vector<ChatMessage>& messages) {
    Json out = Json::array();
    for (const auto& m : messages) out.push_back(Json{{"role", to_string(m.speaker)}, {"content", m.text}});
    return out;
}

bool chunk_contains(const Chunk& chunk, const std::string& fragment) {
    for (const auto& t : chunk.turns) {
        if (t.content.find(fragment) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

std::string_view to_string(SftKind kind) {
    return kind == SftKind::FactStage ? "fact_stage" : "insight_stage";
}

void to_json(Json& j, const SftPair& p) {
    j = Json{{"record_id", p.record_id},
             {"step_index", p.step_index},
             {"chunk_id", p.chunk_id},
             {"kind", std::string(to_string(p.kind))},
             {"input", p.input},
             {"messages", messages_json(p.messages)},
             {"target", p.target ? Json(*p.target) : Json(nullptr)}};
}

void SftConfig::validate() const {
    if (chunk_budget < 1) fail(ErrorCode::InvalidConfig, "chunk_budget must be >= 1");
    if (!(negative_ratio >= 0.0)) fail(ErrorCode::InvalidConfig, "negative_ratio must be >= 0");
}

std::vector<SftPair> export_sft(const std::vector<RoleMemoRecord>& records, const SftConfig& config,
                                const Tokenizer& tokenizer, const PromptLibrary& prompts) {
    config.validate();
    std::vector<SftPair> out;
    for (const auto& record : records) {
        const std::vector<Chunk> chunks = partition(record.conversation, config.chunk_budget, tokenizer);
        const std::string persona = persona_text(record.persona);

        // First step holding each fragment.
        std::vector<std::size_t> first_step(record.fragments.size(), 0);
        for (const auto& chunk : chunks) {
            for (std::size_t f = 0; f < record.fragments.size(); ++f) {
                if (first_step[f] == 0 && chunk_contains(chunk, record.fragments[f])) first_step[f] = chunk.step_index;
            }
        }
        std::size_t complete_step = 0;
        bool complete = true;
        for (std::size_t s : first_step) {
            if (s == 0) complete = false;
            complete_step = std::max(complete_step, s);
        }
        if (!complete) {
            fail(ErrorCode::SchemaViolation, "record '" + record.record_id() + "': a fragment is in no chunk");
        }

        const std::size_t positives = 1;
        const auto negative_cap =
            static_cast<std::size_t>(std::floor(config.negative_ratio * static_cast<double>(positives)));
        std::size_t negatives = 0;
        std::string prior_view;

        for (const auto& chunk : chunks) {
            std::vector<std::string> here;
            for (const auto& f : record.fragments) {
                if (chunk_contains(chunk, f)) here.push_back(f);
            }

            if (here.empty()) {
                if (negatives >= negative_cap) continue;
                ++negatives;
            } else {
                SftPair fact;
                fact.record_id = record.record_id();
                fact.step_index = chunk.step_index;
                fact.chunk_id = chunk.chunk_id;
                fact.kind = SftKind::FactStage;
                fact.input = Json{{"persona", persona}, {"chunk", render_turns(chunk.turns)}};
                fact.messages = prompts.get("fact_extraction")
                                    .render({{"persona", persona}, {"chunk", render_turns(chunk.turns)}});
                fact.target = Json(here).dump();
                out.push_back(std::move(fact));
            }

            std::string facts_block;
            for (std::size_t n = 0; n < here.size(); ++n) {
                if (!facts_block.empty()) facts_block += '\n';
                facts_block += render_entry_line(
                    EntryKind::Fact, make_entry_id(record.conversation.id, chunk.step_index, EntryKind::Fact, n),
                    here[n]);
            }

            SftPair insight;
            insight.record_id = record.record_id();
            insight.step_index = chunk.step_index;
            insight.chunk_id = chunk.chunk_id;
            insight.kind = SftKind::InsightStage;
            insight.input = Json{{"persona", persona}, {"facts", facts_block}, {"prior_view", prior_view}};
            insight.messages = prompts.get("insight_derivation")
                                   .render({{"persona", persona},
                                            {"facts", facts_block.empty() ? "(none)" : facts_block},
                                            {"prior_memory", prior_view.empty() ? "(none)" : prior_view}});
            if (!here.empty() && chunk.step_index == complete_step) insight.target = record.gt_insight;
            out.push_back(std::move(insight));

            if (!facts_block.empty()) {
                if (!prior_view.empty()) prior_view += '\n';
                prior_view += facts_block;
            }
        }
    }
    return out;
}

void to_json(Json& j, const TrainerConfig& c) {
    j = Json{{"framework", c.framework},
             {"algorithm", c.algorithm},
             {"learning_rate", c.learning_rate},
             {"warmup_steps", c.warmup_steps},
             {"batch_size", c.batch_size},
             {"rollouts_per_batch", c.rollouts_per_batch},
             {"total_steps", c.total_steps},
             {"ppo_mini_batch_size", c.ppo_mini_batch_size},
             {"max_prompt_length", c.max_prompt_length},
             {"max_response_length", c.max_response_length},
             {"kl_loss_coef", c.kl_loss_coef},
             {"entropy_coef", c.entropy_coef},
             {"clip_ratio_high", c.clip_ratio_high},
             {"clip_ratio_low", c.clip_ratio_low},
             {"loss_aggregation", c.loss_aggregation},
             {"rollout_temperature", c.rollout_temperature},
             {"rollout_top_p", c.rollout_top_p}};
}

void from_json(const Json& j, TrainerConfig& c) {
    TrainerConfig d;
    c.framework = j.value("framework", d.framework);
    c.algorithm = j.value("algorithm", d.algorithm);
    c.learning_rate = j.value("learning_rate", d.learning_rate);
    c.warmup_steps = j.value("warmup_steps", d.warmup_steps);
    c.batch_size = j.value("batch_size", d.batch_size);
    c.rollouts_per_batch = j.value("rollouts_per_batch", d.rollouts_per_batch);
    c.total_steps = j.value("total_steps", d.total_steps);
    c.ppo_mini_batch_size = j.value("ppo_mini_batch_size", d.ppo_mini_batch_size);
    c.max_prompt_length = j.value("max_prompt_length", d.max_prompt_length);
    c.max_response_length = j.value("max_response_length", d.max_response_length);
    c.kl_loss_coef = j.value("kl_loss_coef", d.kl_loss_coef);
    c.entropy_coef = j.value("entropy_coef", d.entropy_coef);
    c.clip_ratio_high = j.value("clip_ratio_high", d.clip_ratio_high);
    c.clip_ratio_low = j.value("clip_ratio_low", d.clip_ratio_low);
    c.loss_aggregation = j.value("loss_aggregation", d.loss_aggregation);
    c.rollout_temperature = j.value("rollout_temperature", d.rollout_temperature);
    c.rollout_top_p = j.value("rollout_top_p", d.rollout_top_p);
}

void to_json(Json& j, const RolloutArtifacts& a) {
    j = Json{{"trajectory_id", a.trajectory_id}, {"group_id", a.group_id}, {"persona_id", a.persona_id}};
    if (a.trace) j["trace"] = *a.trace;
    if (a.final_response) j["final_response"] = *a.final_response;
    if (a.format_ok) j["format_ok"] = *a.format_ok;
    if (a.quality) j["quality"] = *a.quality;
}

void from_json(const Json& j, RolloutArtifacts& a) {
    a.trajectory_id = j.at("trajectory_id").get<std::string>();
    a.group_id = j.value("group_id", a.trajectory_id);
    a.persona_id = j.value("persona_id", std::string());
    auto opt = [&](const char* key, auto& slot) {
        using T = typename std::decay_t<decltype(slot)>::value_type;
        if (auto it = j.find(key); it != j.end() && !it->is_null()) slot = it->template get<T>();
    };
    opt("trace", a.trace);
    opt("final_response", a.final_response);
    opt("format_ok", a.format_ok);
    opt("quality", a.quality);
}

void to_json(Json& j, const TrajectoryReward& r) {
    j = Json{{"trajectory_id", r.trajectory_id},
             {"format_ok", r.format_ok},
             {"quality", r.quality},
             {"scalar", r.scalar},
             {"advantage", r.advantage}};
}

void to_json(Json& j, const RlTrajectoryLog& log) {
    Json steps = Json::array();
    for (const auto& s : log.steps) {
        steps.push_back(Json{{"step_index", s.step_index},
                             {"chunk_id", s.chunk_id},
                             {"prompt_fingerprints", s.prompt_fingerprints},
                             {"facts", s.facts},
                             {"insights", s.insights}});
    }
    j = Json{{"trajectory_id", log.trajectory_id},
             {"group_id", log.group_id},
             {"persona_id", log.persona_id},
             {"steps", steps},
             {"final_response", log.final_response},
             {"reward", log.reward},
             {"trainer_config", log.trainer_config}};
}

std::vector<RlTrajectoryLog> export_rl(const std::vector<RolloutArtifacts>& runs, const TrainerConfig& trainer) {
    std::vector<RlTrajectoryLog> out;
    out.reserve(runs.size());
    std::map<std::string, std::vector<std::size_t>> groups;
    for (const auto& run : runs) {
        auto missing = [&](const char* what) {
            fail(ErrorCode::MissingArtifact, run.trajectory_id + ": missing " + what);
        };
        if (!run.trace) missing("build trace");
        if (!run.final_response) missing("final response");
        if (!run.format_ok) missing("format verdict");
        if (!run.quality) missing("quality score");
        validate_quality(*run.quality);
        for (std::size_t i = 1; i < run.trace->steps.size(); ++i) {
            if (run.trace->steps[i].step_index <= run.trace->steps[i - 1].step_index) {
                fail(ErrorCode::SchemaViolation, run.trajectory_id + ": steps out of order");
            }
        }

        RlTrajectoryLog log;
        log.trajectory_id = run.trajectory_id;
        log.group_id = run.group_id.empty() ? run.trajectory_id : run.group_id;
        log.persona_id = run.persona_id;
        log.steps = run.trace->steps;
        log.final_response = *run.final_response;
        log.reward.trajectory_id = run.trajectory_id;
        log.reward.format_ok = *run.format_ok;
        log.reward.quality = *run.quality;
        log.reward.scalar = scalar_reward(*run.format_ok, *run.quality);
        log.trainer_config = trainer;
        groups[log.group_id].push_back(out.size());
        out.push_back(std::move(log));
    }
    for (const auto& [group, members] : groups) {
        std::vector<double> rewards;
        for (std::size_t i : members) rewards.push_back(out[i].reward.scalar);
        const std::vector<double> adv = group_advantage(rewards);
        for (std::size_t m = 0; m < members.size(); ++m) out[members[m]].reward.advantage = adv[m];
    }
    return out;
}

}  // namespace dualmem
