#include "dualmem/chunker/chunker.hpp"

#include "dualmem/error.hpp"

namespace dualmem {

namespace {

bool is_word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool is_space_byte(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::size_t HeuristicTokenizer::count(std::string_view text) const {
    std::size_t n = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (is_word_byte(c)) {
            if (!in_word) ++n;
            in_word = true;
        } else {
            in_word = false;
            if (!is_space_byte(c)) ++n;
        }
    }
    return n;
}

std::unique_ptr<Tokenizer> make_tokenizer(std::string_view name) {
    if (name == "heuristic") return std::make_unique<HeuristicTokenizer>();
    fail(ErrorCode::InvalidConfig, "unknown tokenizer '" + std::string(name) + "'");
}

std::size_t count_tokens(std::string_view text, const Tokenizer& tokenizer) {
    return tokenizer.count(text);
}

std::string render_turn(const Turn& turn) {
    std::string out(to_string(turn.role));
    out += ": ";
    out += turn.content;
    return out;
}

std::string render_turns(const std::vector<Turn>& turns) {
    std::string out;
    for (const auto& t : turns) {
        if (!out.empty()) out += '\n';
        out += render_turn(t);
    }
    return out;
}

std::size_t turn_tokens(const Turn& turn, const Tokenizer& tokenizer) {
    return tokenizer.count(render_turn(turn));
}

std::vector<Chunk> partition(const Conversation& conversation, std::size_t budget, const Tokenizer& tokenizer) {
    if (budget == 0) fail(ErrorCode::InvalidConfig, "chunk budget must be >= 1");
    if (conversation.turns.empty()) fail(ErrorCode::EmptyConversation, "conversation '" + conversation.id + "'");

    std::vector<Chunk> chunks;
    Chunk current;
    auto open_chunk = [&] {
        current = Chunk{};
        current.step_index = chunks.size() + 1;
        current.conversation_id = conversation.id;
        current.chunk_id = make_chunk_id(conversation.id, current.step_index);
    };
    open_chunk();

    for (const Turn& turn : conversation.turns) {
        const std::size_t cost = turn_tokens(turn, tokenizer);
        if (cost > budget) {
            fail(ErrorCode::TurnExceedsBudget, "turn " + std::to_string(turn.turn_index) + " needs " +
                                                   std::to_string(cost) + " tokens, budget is " +
                                                   std::to_string(budget));
        }
        if (!current.turns.empty() && current.token_count + cost > budget) {
            chunks.push_back(std::move(current));
            open_chunk();
        }
        current.turns.push_back(turn);
        current.token_count += cost;
    }
    chunks.push_back(std::move(current));
    return chunks;
}

}  // namespace dualmem
