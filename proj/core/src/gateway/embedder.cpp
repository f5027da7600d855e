#include "dualmem/gateway/embedder.hpp"

#include <algorithm>
#include <cmath>

#include "dualmem/error.hpp"
#include "dualmem/gateway/gateway.hpp"

namespace dualmem {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

bool is_word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

void add_token(std::vector<double>& acc, std::string_view token) {
    std::uint64_t h = fnv1a(token);
    double sign = ((h >> 32) & 1U) ? -1.0 : 1.0;
    acc[h % acc.size()] += sign;
}

}  // namespace

Embedding Embedder::embed(const std::string& text) {
    return embed_batch({text}).front();
}

std::vector<std::string> hash_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (is_word_byte(c)) {
            cur.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

HashEmbedder::HashEmbedder(std::size_t dimension) : dim_(dimension) {
    if (dim_ == 0) fail(ErrorCode::InvalidConfig, "embedding dimension must be >= 1");
}

std::string HashEmbedder::name() const {
    return "hash-" + std::to_string(dim_);
}

Embedding HashEmbedder::embed_one(std::string_view text) const {
    std::vector<double> acc(dim_, 0.0);
    for (const auto& tok : hash_tokens(text)) add_token(acc, tok);

    double sq = 0.0;
    for (double x : acc) sq += x * x;
    if (sq == 0.0) {
        std::fill(acc.begin(), acc.end(), 0.0);
        add_token(acc, text);
        sq = 1.0;
    }
    const double inv = 1.0 / std::sqrt(sq);
    Embedding out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(acc[i] * inv);
    return out;
}

std::vector<Embedding> HashEmbedder::embed_batch(const std::vector<std::string>& texts) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

GatewayEmbedder::GatewayEmbedder(std::shared_ptr<Gateway> gateway) : gateway_(std::move(gateway)) {
    if (!gateway_) fail(ErrorCode::InvalidConfig, "GatewayEmbedder needs a gateway");
}

std::vector<Embedding> GatewayEmbedder::embed_batch(const std::vector<std::string>& texts) {
    return gateway_->embed_batch(texts);
}

std::string GatewayEmbedder::name() const {
    return "remote:" + gateway_->config().embed_model;
}

}  // namespace dualmem
