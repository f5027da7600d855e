#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "dualmem/core/types.hpp"

namespace dualmem {

class Gateway;

// Maps texts to unit-norm vectors of a fixed dimension. Output order matches
// input order.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) = 0;
    virtual std::string name() const = 0;

    Embedding embed(const std::string& text);
};

// Offline, deterministic bag-of-tokens embedder.
//
// Text is lowercased and split into runs of ASCII letters/digits (bytes >= 0x80
// count as letters). Each token is FNV-1a hashed; the hash selects a bucket
// (h mod dim) and a sign (bit 32 of h), and contributes +/-1 there. The sum is
// L2-normalized. Texts with no tokens, or whose contributions cancel, hash the
// whole string as one token instead, so the result is always unit-norm.
class HashEmbedder final : public Embedder {
public:
    static constexpr std::size_t kDefaultDimension = 64;

    explicit HashEmbedder(std::size_t dimension = kDefaultDimension);

    std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) override;
    std::string name() const override;
    std::size_t dimension() const noexcept { return dim_; }

    Embedding embed_one(std::string_view text) const;

private:
    std::size_t dim_;
};

// Embeds through the gateway's remote embedding endpoint (cassette aware).
class GatewayEmbedder final : public Embedder {
public:
    explicit GatewayEmbedder(std::shared_ptr<Gateway> gateway);

    std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) override;
    std::string name() const override;

private:
    std::shared_ptr<Gateway> gateway_;
};

// Lowercased word tokens as used by HashEmbedder.
std::vector<std::string> hash_tokens(std::string_view text);

}  // namespace dualmem
