#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dualmem/gateway/cassette.hpp"
#include "dualmem/gateway/chat.hpp"
#include "dualmem/gateway/transport.hpp"

namespace dualmem {

struct GatewayConfig {
    std::string llm_base_url;    // LLM_BASE_URL, e.g. https://api.example.com/v1
    std::string embed_base_url;  // EMBED_BASE_URL; falls back to llm_base_url
    std::string api_key;         // LLM_API_KEY
    std::map<RoleTag, std::string> models{{RoleTag::MemoryModel, "memory-model"},
                                          {RoleTag::RolePlayAgent, "role-play-agent"},
                                          {RoleTag::Judge, "judge"}};
    std::string embed_model = "embedding-model";

    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::optional<std::size_t> max_requests;  // live requests allowed before BudgetExceeded
    std::size_t max_in_flight = 4;

    // Reads LLM_API_KEY, LLM_BASE_URL and EMBED_BASE_URL.
    static GatewayConfig from_env();
};

struct GatewayStats {
    std::size_t requests = 0;        // chat + embed calls made on the gateway
    std::size_t cassette_hits = 0;
    std::size_t network_calls = 0;   // transport invocations, retries included
    std::size_t cassette_writes = 0;
};

// Uniform entry point to chat and embedding backends.
//
// Replay mode answers only from the cassette and never touches the transport;
// a miss is CassetteMiss. Record mode answers from the cassette when it can and
// otherwise performs the live call and stores the result. Live mode bypasses
// the cassette. Transport failures and 429/5xx responses are retried with
// exponential backoff. Shareable across threads.
class Gateway {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    Gateway(GatewayConfig config, std::shared_ptr<Cassette> cassette,
            std::shared_ptr<Transport> transport = nullptr);

    std::string chat(const ChatRequest& request);

    // Remote embeddings; each vector is L2-normalized before return.
    std::vector<Embedding> embed_batch(const std::vector<std::string>& texts);

    GatewayStats stats() const;
    std::size_t network_calls() const { return network_calls_.load(); }
    std::size_t max_observed_in_flight() const { return max_observed_in_flight_.load(); }

    const GatewayConfig& config() const noexcept { return config_; }
    CassetteMode mode() const noexcept { return cassette_->mode(); }

    // Test hook: replaces the backoff sleep.
    void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

private:
    HttpResponse send_with_retries(const HttpRequest& request);
    void acquire_slot();
    void release_slot();
    void charge_budget();

    GatewayConfig config_;
    std::shared_ptr<Cassette> cassette_;
    std::shared_ptr<Transport> transport_;
    Sleeper sleeper_;

    std::mutex slot_mu_;
    std::condition_variable slot_cv_;
    std::size_t in_flight_ = 0;

    std::atomic<std::size_t> requests_{0};
    std::atomic<std::size_t> live_requests_{0};
    std::atomic<std::size_t> cassette_hits_{0};
    std::atomic<std::size_t> network_calls_{0};
    std::atomic<std::size_t> max_observed_in_flight_{0};
};

// L2-normalizes in place. Throws ZeroVector for an all-zero input.
void normalize(Embedding& v);

}  // namespace dualmem
