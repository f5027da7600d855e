#include "dualmem/evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dualmem/error.hpp"
#include "dualmem/retrieval/vector_ops.hpp"

namespace dualmem {

void RecallConfig::validate() const {
    if (k < 1) fail(ErrorCode::InvalidConfig, "recall k must be >= 1");
    if (!(tau > 0.0 && tau <= 1.0)) fail(ErrorCode::InvalidConfig, "tau must be in (0, 1]");
}

RecallDetail recall_detail_vectors(std::span<const Embedding> gt, std::span<const Embedding> retrieved,
                                   const RecallConfig& config) {
    config.validate();
    if (gt.empty()) fail(ErrorCode::EmptyGroundTruth, "recall needs at least one ground-truth entry");
    const std::size_t n = std::min(config.k, retrieved.size());

    RecallDetail detail;
    detail.recalled.reserve(gt.size());
    detail.best_cosine.reserve(gt.size());
    std::size_t hits = 0;
    for (const auto& g : gt) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) best = std::max(best, cosine(g, retrieved[j]));
        bool ok = best >= config.tau;
        hits += ok ? 1 : 0;
        detail.recalled.push_back(ok);
        detail.best_cosine.push_back(best);
    }
    detail.value = static_cast<double>(hits) / static_cast<double>(gt.size());
    return detail;
}

RecallDetail recall_detail(const std::vector<std::string>& gt_entries, const std::vector<std::string>& retrieved,
                           Embedder& embedder, const RecallConfig& config) {
    config.validate();
    if (gt_entries.empty()) fail(ErrorCode::EmptyGroundTruth, "recall needs at least one ground-truth entry");
    std::vector<std::string> top(retrieved.begin(),
                                 retrieved.begin() + static_cast<std::ptrdiff_t>(std::min(config.k, retrieved.size())));
    auto gt_vecs = embedder.embed_batch(gt_entries);
    std::vector<Embedding> r_vecs;
    if (!top.empty()) r_vecs = embedder.embed_batch(top);
    return recall_detail_vectors(gt_vecs, r_vecs, config);
}

double recall_at_k(const std::vector<std::string>& gt_entries, const std::vector<std::string>& retrieved,
                   Embedder& embedder, const RecallConfig& config) {
    return recall_detail(gt_entries, retrieved, embedder, config).value;
}

double macro_average(std::span<const double> per_query) {
    if (per_query.empty()) fail(ErrorCode::EmptyInput, "macro_average of an empty list");
    double sum = 0.0;
    for (double v : per_query) sum += v;
    return sum / static_cast<double>(per_query.size());
}

void to_json(Json& j, const QualityScore& q) {
    j = Json{{"info", q.info},
             {"logic", q.logic},
             {"consistency", q.consistency},
             {"attractiveness", q.attractiveness},
             {"n_judge_calls", q.n_judge_calls}};
}

void from_json(const Json& j, QualityScore& q) {
    q.info = j.at("info").get<double>();
    q.logic = j.at("logic").get<double>();
    q.consistency = j.at("consistency").get<double>();
    q.attractiveness = j.at("attractiveness").get<double>();
    q.n_judge_calls = j.value("n_judge_calls", 0);
}

void validate_quality(const QualityScore& q) {
    for (double d : q.dims()) {
        if (!(d >= 1.0 && d <= 5.0)) fail(ErrorCode::OutOfRangeScore, "quality dimension " + std::to_string(d));
    }
}

double agreement(const QualityScore& a, const QualityScore& b) {
    const auto da = a.dims();
    const auto db = b.dims();
    double dev = 0.0;
    for (std::size_t d = 0; d < da.size(); ++d) {
        if (!(da[d] > 0.0)) fail(ErrorCode::OutOfRangeScore, "reference score must be positive");
        dev += std::abs(da[d] - db[d]) / da[d];
    }
    return 1.0 - dev / static_cast<double>(da.size());
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        fail(ErrorCode::LengthMismatch, std::to_string(xs.size()) + " vs " + std::to_string(ys.size()));
    }
    if (xs.size() < 2) fail(ErrorCode::EmptyInput, "pearson needs at least two pairs");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) fail(ErrorCode::ZeroVariance, "pearson input has zero variance");
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

double scalar_reward(bool format_ok, const QualityScore& q) {
    validate_quality(q);
    return format_ok ? q.mean() / 5.0 : 0.0;
}

std::vector<double> group_advantage(std::span<const double> rewards) {
    std::vector<double> out(rewards.size(), 0.0);
    if (rewards.size() < 2) return out;
    if (std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards.front(); })) return out;
    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    const double sd = std::sqrt(var / n);
    if (sd == 0.0) return out;
    const double denom = std::max(sd, kAdvantageEpsilon);
    for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / denom;
    return out;
}

}  // namespace dualmem
