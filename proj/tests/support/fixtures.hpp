#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dualmem/core/memory_bank.hpp"
#include "dualmem/core/types.hpp"

namespace dualmem::test {

Persona make_persona(std::int64_t id = 1);

// Alternating User/Assistant turns with the given contents.
Conversation make_conversation(const std::vector<std::string>& contents, std::string id = "conv");

// Random conversation of `n_turns` turns with 1..max_words words each.
Conversation random_conversation(std::mt19937_64& rng, std::size_t n_turns, std::size_t max_words,
                                 std::string id = "conv");

// A valid record whose fragments sit in user turns `a` and `b`.
RoleMemoRecord make_record(std::string query_id = "q1", std::size_t n_turns = 12, std::size_t a = 2,
                           std::size_t b = 8);

std::string random_sentence(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words);

// Unit vector of dimension `dim` with Gaussian entries.
Embedding random_unit(std::mt19937_64& rng, std::size_t dim);

// A fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "dualmem-test");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

std::filesystem::path source_dir();

}  // namespace dualmem::test
