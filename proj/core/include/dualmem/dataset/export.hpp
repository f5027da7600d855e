#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dualmem/chunker/chunker.hpp"
#include "dualmem/construction/builder.hpp"
#include "dualmem/evaluation/metrics.hpp"
#include "dualmem/prompts/prompt_library.hpp"

namespace dualmem {

// ---------------------------------------------------------------------------
// SFT pairs
// ---------------------------------------------------------------------------

enum class SftKind { FactStage, InsightStage };

std::string_view to_string(SftKind kind);

// One line of sft.jsonl:
//   record_id, step_index, chunk_id
//   kind      "fact_stage" | "insight_stage"
//   input     fact_stage:    {persona, chunk}
//             insight_stage: {persona, facts, prior_view}
//   messages  the rendered memory-model prompt for `input`
//   target    fact_stage: JSON array text of the annotated fragments in the
//             chunk; insight_stage: gt_insight or null
struct SftPair {
    std::string record_id;
    std::size_t step_index = 0;
    std::string chunk_id;
    SftKind kind = SftKind::FactStage;
    Json input;
    std::vector<ChatMessage> messages;
    std::optional<std::string> target;
};

void to_json(Json& j, const SftPair& p);

struct SftConfig {
    std::size_t chunk_budget = kDefaultChunkTokens;
    // Null-target pairs from fragment-free chunks, per positive pair of the
    // record (rounded down). Negatives are taken in step order.
    double negative_ratio = 1.0;

    void validate() const;
};

// Per record, per chunk in step order:
//   - chunks holding a fragment emit a fact_stage pair, then an insight_stage
//     pair whose target is gt_insight only at the evidence-complete step (the
//     first step by which both fragments have appeared) and null otherwise;
//   - fragment-free chunks emit a null insight_stage pair, up to the cap.
// Facts shown to the insight stage are the annotated fragments of the chunk;
// the prior view lists the fragments of earlier chunks.
std::vector<SftPair> export_sft(const std::vector<RoleMemoRecord>& records, const SftConfig& config,
                                const Tokenizer& tokenizer,
                                const PromptLibrary& prompts = PromptLibrary::defaults());

// ---------------------------------------------------------------------------
// RL trajectories
// ---------------------------------------------------------------------------

// Hyperparameters echoed for the external trainer.
struct TrainerConfig {
    std::string framework = "verl";
    std::string algorithm = "DAPO";
    double learning_rate = 1e-6;
    int warmup_steps = 20;
    int batch_size = 32;
    int rollouts_per_batch = 8;
    int total_steps = 500;
    int ppo_mini_batch_size = 4;
    int max_prompt_length = 8192;
    int max_response_length = 1024;
    double kl_loss_coef = 0.001;
    double entropy_coef = 0.0;
    double clip_ratio_high = 0.20;
    double clip_ratio_low = 0.10;
    std::string loss_aggregation = "token-mean";
    double rollout_temperature = 1.0;
    double rollout_top_p = 1.0;
};

void to_json(Json& j, const TrainerConfig& c);
void from_json(const Json& j, TrainerConfig& c);

// Inputs for one trajectory. Everything but the ids is optional so that an
// incomplete run can be reported as MissingArtifact.
struct RolloutArtifacts {
    std::string trajectory_id;
    std::string group_id;
    std::string persona_id;
    std::optional<BuildTrace> trace;
    std::optional<std::string> final_response;
    std::optional<bool> format_ok;
    std::optional<QualityScore> quality;
};

void to_json(Json& j, const RolloutArtifacts& a);
void from_json(const Json& j, RolloutArtifacts& a);

struct TrajectoryReward {
    std::string trajectory_id;
    bool format_ok = false;
    QualityScore quality;
    double scalar = 0.0;
    double advantage = 0.0;
};

void to_json(Json& j, const TrajectoryReward& r);

// One line of rl.jsonl.
struct RlTrajectoryLog {
    std::string trajectory_id;
    std::string group_id;
    std::string persona_id;
    std::vector<StepTrace> steps;
    std::string final_response;
    TrajectoryReward reward;
    TrainerConfig trainer_config;
};

void to_json(Json& j, const RlTrajectoryLog& log);

// Rewards via scalar_reward; advantages via group_advantage within each
// group_id. Output follows input order. Throws MissingArtifact(trajectory_id)
// and SchemaViolation for out-of-order steps.
std::vector<RlTrajectoryLog> export_rl(const std::vector<RolloutArtifacts>& runs, const TrainerConfig& trainer);

}  // namespace dualmem
