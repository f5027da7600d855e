#include "fixtures.hpp"

#include <atomic>
#include <cmath>

namespace dualmem::test {

namespace {

const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> words = {
        "harbor", "boat", "father", "sister", "storm", "coffee", "morning", "shanghai", "startup", "offer",
        "wedding", "garden", "violin", "kitchen", "river", "train", "letter", "winter", "market", "school",
        "doctor", "piano", "island", "bridge", "lantern", "mountain", "recipe", "novel", "salary", "promise",
        "quiet", "brave", "tired", "happy", "worried", "proud", "lost", "honest", "angry", "gentle"};
    return words;
}

}  // namespace

Persona make_persona(std::int64_t id) {
    Persona p;
    p.id = id;
    p.category = "Mentor";
    for (const auto& field : persona_descriptive_fields()) {
        p.*field.member = std::string(field.label) + " of persona " + std::to_string(id);
    }
    p.content = derive_persona_content(p);
    return p;
}

Conversation make_conversation(const std::vector<std::string>& contents, std::string id) {
    Conversation c;
    c.id = std::move(id);
    for (std::size_t i = 0; i < contents.size(); ++i) {
        c.turns.push_back({i % 2 == 0 ? Speaker::User : Speaker::Assistant, contents[i], i});
    }
    return c;
}

std::string random_sentence(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words) {
    std::uniform_int_distribution<std::size_t> len(min_words, max_words);
    std::uniform_int_distribution<std::size_t> pick(0, vocabulary().size() - 1);
    std::string s;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += vocabulary()[pick(rng)];
    }
    return s;
}

Conversation random_conversation(std::mt19937_64& rng, std::size_t n_turns, std::size_t max_words, std::string id) {
    std::vector<std::string> contents;
    for (std::size_t i = 0; i < n_turns; ++i) contents.push_back(random_sentence(rng, 1, max_words));
    return make_conversation(contents, std::move(id));
}

RoleMemoRecord make_record(std::string query_id, std::size_t n_turns, std::size_t a, std::size_t b) {
    std::vector<std::string> contents;
    for (std::size_t i = 0; i < n_turns; ++i) contents.push_back("Casual line number " + std::to_string(i) + ".");
    const std::string frag_a = "My father left me his old fishing boat.";
    const std::string frag_b = "I got an offer to join a startup in Shanghai.";
    contents[a] = "Morning. " + frag_a + " Not sure what to do.";
    contents[b] = "Big news. " + frag_b + " It pays well.";

    RoleMemoRecord r;
    r.persona = make_persona();
    r.conversation = make_conversation(contents, "conv-" + query_id);
    r.query = {query_id, "Should I take the job or keep the boat?", QueryType::DecisionGuidance};
    r.fragments = {frag_a, frag_b};
    r.fragment_positions = {{frag_a, contents[a]}, {frag_b, contents[b]}};
    r.gt_insight = "The user is torn between the father's boat and the Shanghai startup.";
    r.connector = "Legacy versus career.";
    r.reference_response = "Go if your heart is in it; the boat can wait.";
    return r;
}

Embedding random_unit(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(dim);
    double sq = 0.0;
    do {
        sq = 0.0;
        for (auto& x : v) {
            x = g(rng);
            sq += x * x;
        }
    } while (sq == 0.0);
    Embedding out(dim);
    for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / std::sqrt(sq));
    return out;
}

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::filesystem::path source_dir() {
    return DUALMEM_SOURCE_DIR;
}

}  // namespace dualmem::test
