#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dualmem/core/types.hpp"
#include "dualmem/gateway/embedder.hpp"

namespace dualmem {

struct RecallConfig {
    std::size_t k = 10;
    double tau = 0.7;

    // 0 < tau <= 1, k >= 1. Throws InvalidConfig.
    void validate() const;
};

struct RecallDetail {
    std::vector<bool> recalled;        // one flag per ground-truth entry
    std::vector<double> best_cosine;   // max over retrieved; -inf when none
    double value = 0.0;                // fraction recalled
};

// A ground-truth entry counts as recalled when its best cosine against any of
// the first k retrieved entries is >= tau. Throws EmptyGroundTruth.
RecallDetail recall_detail(const std::vector<std::string>& gt_entries, const std::vector<std::string>& retrieved,
                           Embedder& embedder, const RecallConfig& config);
RecallDetail recall_detail_vectors(std::span<const Embedding> gt, std::span<const Embedding> retrieved,
                                   const RecallConfig& config);
double recall_at_k(const std::vector<std::string>& gt_entries, const std::vector<std::string>& retrieved,
                   Embedder& embedder, const RecallConfig& config);

// Arithmetic mean. Throws EmptyInput.
double macro_average(std::span<const double> per_query);

struct QualityScore {
    double info = 0.0;
    double logic = 0.0;
    double consistency = 0.0;
    double attractiveness = 0.0;
    int n_judge_calls = 0;

    std::array<double, 4> dims() const { return {info, logic, consistency, attractiveness}; }
    double mean() const { return (info + logic + consistency + attractiveness) / 4.0; }
};

void to_json(Json& j, const QualityScore& q);
void from_json(const Json& j, QualityScore& q);

// Throws OutOfRangeScore unless every dimension is in [1, 5].
void validate_quality(const QualityScore& q);

// 1 - mean_d |a_d - b_d| / a_d with `a` as the reference. Not symmetric.
double agreement(const QualityScore& a, const QualityScore& b);

// Sample Pearson correlation. Throws LengthMismatch, EmptyInput (n < 2) and
// ZeroVariance.
double pearson(std::span<const double> xs, std::span<const double> ys);

// format_ok ? mean(dims) / 5 : 0.
double scalar_reward(bool format_ok, const QualityScore& q);

inline constexpr double kAdvantageEpsilon = 1e-8;

// (r - mean) / max(population_std, eps). Groups of size 1 or with zero
// spread map to all zeros.
std::vector<double> group_advantage(std::span<const double> rewards);

}  // namespace dualmem
