#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace dualmem::oracle {

std::size_t token_count(const std::string& text) {
    auto wordish = [](unsigned char c) { return c >= 0x80 || std::isalnum(c); };
    std::size_t n = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (wordish(c)) {
            ++n;
            while (i < text.size() && wordish(static_cast<unsigned char>(text[i]))) ++i;
        } else {
            if (!std::isspace(c)) ++n;
            ++i;
        }
    }
    return n;
}

std::vector<std::size_t> turn_costs(const Conversation& c) {
    std::vector<std::size_t> out;
    for (const auto& t : c.turns) {
        out.push_back(token_count((t.role == Speaker::User ? "User: " : "Assistant: ") + t.content));
    }
    return out;
}

std::vector<std::size_t> greedy_chunk_sizes(const std::vector<std::size_t>& costs, std::size_t budget) {
    std::vector<std::size_t> sizes;
    std::size_t used = 0;
    std::size_t count = 0;
    for (std::size_t cost : costs) {
        if (count > 0 && used + cost > budget) {
            sizes.push_back(count);
            used = 0;
            count = 0;
        }
        used += cost;
        ++count;
    }
    if (count > 0) sizes.push_back(count);
    return sizes;
}

long double cosine(const Embedding& a, const Embedding& b) {
    long double ab = 0;
    long double aa = 0;
    long double bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += static_cast<long double>(a[i]) * b[i];
        aa += static_cast<long double>(a[i]) * a[i];
        bb += static_cast<long double>(b[i]) * b[i];
    }
    return ab / std::sqrt(aa * bb);
}

std::vector<bool> recalled_set(const std::vector<Embedding>& gt, const std::vector<Embedding>& retrieved,
                               std::size_t k, double tau) {
    std::vector<bool> out;
    for (const auto& g : gt) {
        bool hit = false;
        for (std::size_t j = 0; j < retrieved.size() && j < k; ++j) {
            if (cosine(g, retrieved[j]) >= tau) hit = true;
        }
        out.push_back(hit);
    }
    return out;
}

std::vector<std::size_t> top_k_rows(const std::vector<Embedding>& rows, const Embedding& query, std::size_t k) {
    std::vector<std::pair<long double, std::size_t>> scored;
    for (std::size_t i = 0; i < rows.size(); ++i) scored.push_back({cosine(rows[i], query), i});
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].second);
    return out;
}

std::vector<double> advantage(const std::vector<double>& rewards) {
    std::vector<double> out(rewards.size(), 0.0);
    if (rewards.size() < 2) return out;
    long double mean = 0;
    for (double r : rewards) mean += r;
    mean /= rewards.size();
    long double var = 0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= rewards.size();
    if (var == 0) return out;
    const long double sd = std::sqrt(var);
    for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = static_cast<double>((rewards[i] - mean) / sd);
    return out;
}

FragmentScan scan_fragment(const RoleMemoRecord& record, const std::string& fragment) {
    FragmentScan scan;
    auto pos = record.fragment_positions.find(fragment);
    for (const auto& t : record.conversation.turns) {
        if (pos != record.fragment_positions.end() && t.content == pos->second) ++scan.exact_turns;
        if (t.role == Speaker::User && t.content.find(fragment) != std::string::npos) ++scan.user_turns_containing;
    }
    return scan;
}

bool difficulty_ok(const RoleMemoRecord& record) {
    for (const auto& f : record.fragments) {
        FragmentScan s = scan_fragment(record, f);
        if (s.exact_turns != 1 || s.user_turns_containing != 1) return false;
    }
    return true;
}

std::vector<std::string> audit_bank(const MemoryBank& bank) {
    std::vector<std::string> problems;
    std::map<std::string, std::size_t> fact_step;
    std::set<std::string> ids;
    for (const auto& f : bank.facts()) {
        if (!ids.insert(f.entry_id).second) problems.push_back("duplicate id " + f.entry_id);
        if (f.step_index < 1 || f.step_index > bank.step_count()) problems.push_back("fact step out of range " + f.entry_id);
        const std::string prefix = bank.conversation_id() + ":" + std::to_string(f.step_index) + ":fact:";
        if (f.entry_id.rfind(prefix, 0) != 0) problems.push_back("fact id does not encode its step " + f.entry_id);
        fact_step[f.entry_id] = f.step_index;
    }
    if (bank.mode() == BankMode::FactOnly && !bank.insights().empty()) problems.push_back("insights in a FactOnly bank");
    for (const auto& ins : bank.insights()) {
        if (!ids.insert(ins.entry_id).second) problems.push_back("duplicate id " + ins.entry_id);
        const std::string prefix = bank.conversation_id() + ":" + std::to_string(ins.step_index) + ":insight:";
        if (ins.entry_id.rfind(prefix, 0) != 0) problems.push_back("insight id does not encode its step " + ins.entry_id);
        if (ins.linked_fact_ids.empty()) problems.push_back("insight without links " + ins.entry_id);
        for (const auto& link : ins.linked_fact_ids) {
            auto it = fact_step.find(link);
            if (it == fact_step.end()) {
                problems.push_back("dangling link " + ins.entry_id + " -> " + link);
            } else if (it->second > ins.step_index) {
                problems.push_back("link into the future " + ins.entry_id + " -> " + link);
            }
        }
    }
    for (std::size_t i = 1; i < bank.facts().size(); ++i) {
        if (bank.facts()[i].step_index < bank.facts()[i - 1].step_index) problems.push_back("facts out of step order");
    }
    for (std::size_t i = 1; i < bank.insights().size(); ++i) {
        if (bank.insights()[i].step_index < bank.insights()[i - 1].step_index) {
            problems.push_back("insights out of step order");
        }
    }
    return problems;
}

std::vector<Embedding> TableEmbedder::embed_batch(const std::vector<std::string>& texts) {
    std::vector<Embedding> out;
    for (const auto& t : texts) {
        auto it = table_.find(t);
        if (it == table_.end()) throw std::out_of_range("TableEmbedder has no vector for '" + t + "'");
        out.push_back(it->second);
    }
    return out;
}

Embedding perturb(std::mt19937_64& rng, const Embedding& center, double sigma) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(center.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = center[i] + sigma * g(rng);
        sq += v[i] * v[i];
    }
    Embedding out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / std::sqrt(sq));
    return out;
}

}  // namespace dualmem::oracle
