#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dualmem/core/types.hpp"

namespace dualmem {

class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::string name() const = 0;
    virtual std::size_t count(std::string_view text) const = 0;
};

// Whitespace-and-punctuation segmentation: every maximal run of word bytes
// (ASCII letters, digits, bytes >= 0x80) is one token and every other
// non-whitespace byte is a token of its own. count("hello world") == 2.
//
// Concatenation is subadditive within one token per boundary:
//   count(a) + count(b) - 1 <= count(a + b) <= count(a) + count(b)
class HeuristicTokenizer final : public Tokenizer {
public:
    std::string name() const override { return "heuristic"; }
    std::size_t count(std::string_view text) const override;
};

// Resolves --tokenizer names. Only "heuristic" is built in; throws
// InvalidConfig for anything else.
std::unique_ptr<Tokenizer> make_tokenizer(std::string_view name);

std::size_t count_tokens(std::string_view text, const Tokenizer& tokenizer);

inline constexpr std::size_t kDefaultChunkTokens = 2048;

// "User: <content>" / "Assistant: <content>", the form a turn takes in prompts.
std::string render_turn(const Turn& turn);
std::string render_turns(const std::vector<Turn>& turns);

// Token cost of one turn: count(render_turn(turn)).
std::size_t turn_tokens(const Turn& turn, const Tokenizer& tokenizer);

// Greedy, turn-aligned packing: turns are appended to the current chunk until
// the next one would push it over `budget`, then a new chunk starts. Chunk ids
// come from make_chunk_id; step_index is 1-based; token_count is the sum of the
// member turn costs.
//
// Throws EmptyConversation, TurnExceedsBudget(turn_index) and InvalidConfig
// (budget == 0).
std::vector<Chunk> partition(const Conversation& conversation, std::size_t budget, const Tokenizer& tokenizer);

}  // namespace dualmem
