#include "dualmem/gateway/gateway.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include "dualmem/error.hpp"
#include "dualmem/util/io.hpp"

namespace dualmem {

namespace {

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
}

std::string join_url(std::string base, std::string_view path) {
    while (!base.empty() && base.back() == '/') base.pop_back();
    return base + std::string(path);
}

bool retryable_status(int status) {
    return status == 429 || status >= 500;
}

}  // namespace

GatewayConfig GatewayConfig::from_env() {
    GatewayConfig config;
    config.api_key = env_or_empty("LLM_API_KEY");
    config.llm_base_url = env_or_empty("LLM_BASE_URL");
    config.embed_base_url = env_or_empty("EMBED_BASE_URL");
    return config;
}

void normalize(Embedding& v) {
    double sq = 0.0;
    for (float x : v) sq += static_cast<double>(x) * x;
    if (sq == 0.0) fail(ErrorCode::ZeroVector, "cannot normalize a zero vector");
    double inv = 1.0 / std::sqrt(sq);
    for (float& x : v) x = static_cast<float>(x * inv);
}

Gateway::Gateway(GatewayConfig config, std::shared_ptr<Cassette> cassette, std::shared_ptr<Transport> transport)
    : config_(std::move(config)),
      cassette_(cassette ? std::move(cassette) : std::make_shared<Cassette>()),
      transport_(std::move(transport)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
    if (config_.max_in_flight == 0) fail(ErrorCode::InvalidConfig, "max_in_flight must be >= 1");
    if (config_.max_retries < 0) fail(ErrorCode::InvalidConfig, "max_retries must be >= 0");
    if (!transport_ && cassette_->mode() != CassetteMode::Replay) {
        transport_ = std::make_shared<HttpTransport>();
    }
}

GatewayStats Gateway::stats() const {
    return {requests_.load(), cassette_hits_.load(), network_calls_.load(), cassette_->writes()};
}

void Gateway::acquire_slot() {
    std::unique_lock lock(slot_mu_);
    slot_cv_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
    ++in_flight_;
    std::size_t seen = max_observed_in_flight_.load();
    while (in_flight_ > seen && !max_observed_in_flight_.compare_exchange_weak(seen, in_flight_)) {
    }
}

void Gateway::release_slot() {
    {
        std::lock_guard lock(slot_mu_);
        --in_flight_;
    }
    slot_cv_.notify_one();
}

void Gateway::charge_budget() {
    std::size_t n = ++live_requests_;
    if (config_.max_requests && n > *config_.max_requests) {
        fail(ErrorCode::BudgetExceeded, "live request budget of " + std::to_string(*config_.max_requests) +
                                            " exhausted");
    }
}

HttpResponse Gateway::send_with_retries(const HttpRequest& request) {
    if (!transport_) fail(ErrorCode::InvalidConfig, "no transport configured");
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) sleeper_(config_.initial_backoff * (1 << (attempt - 1)));
        acquire_slot();
        ++network_calls_;
        try {
            HttpResponse resp = transport_->post(request);
            release_slot();
            if (resp.status >= 200 && resp.status < 300) return resp;
            last_error = "HTTP " + std::to_string(resp.status) + " from " + request.url;
            if (!retryable_status(resp.status)) break;
        } catch (const Error& e) {
            release_slot();
            if (e.code() != ErrorCode::TransportError) throw;
            last_error = e.detail();
        } catch (...) {
            release_slot();
            throw;
        }
    }
    fail(ErrorCode::TransportError, last_error + " (after " + std::to_string(config_.max_retries) + " retries)");
}

std::string Gateway::chat(const ChatRequest& request) {
    validate_request(request);
    ++requests_;
    Json canonical = canonical_request(request);
    const std::string fp = util::sha256_hex(canonical_dump(canonical));

    if (cassette_->mode() != CassetteMode::Live) {
        if (auto hit = cassette_->lookup(fp)) {
            if (!hit->is_string()) fail(ErrorCode::IoError, "cassette entry " + fp + " is not a chat response");
            ++cassette_hits_;
            return hit->get<std::string>();
        }
        if (cassette_->mode() == CassetteMode::Replay) {
            fail(ErrorCode::CassetteMiss, fp + " (" + std::string(to_string(request.role_tag)) + ")");
        }
    }

    if (config_.llm_base_url.empty() || config_.api_key.empty()) {
        fail(ErrorCode::InvalidConfig, "live chat requires LLM_BASE_URL and LLM_API_KEY");
    }
    charge_budget();

    Json messages = Json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", to_string(m.speaker)}, {"content", m.text}});
    }
    Json body{{"model", config_.models.at(request.role_tag)},
              {"messages", std::move(messages)},
              {"temperature", request.params.temperature},
              {"max_tokens", request.params.max_tokens},
              {"stream", false}};
    if (request.params.response_format == ResponseFormat::JsonObject) {
        body["response_format"] = {{"type", "json_object"}};
    }

    HttpResponse resp = send_with_retries({join_url(config_.llm_base_url, "/chat/completions"),
                                           {{"Authorization", "Bearer " + config_.api_key}},
                                           body.dump()});
    std::string text;
    try {
        Json parsed = Json::parse(resp.body);
        text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception& e) {
        fail(ErrorCode::TransportError, std::string("malformed chat completion body: ") + e.what());
    }
    cassette_->store(fp, canonical, text);
    return text;
}

std::vector<Embedding> Gateway::embed_batch(const std::vector<std::string>& texts) {
    if (texts.empty()) fail(ErrorCode::EmptyInput, "embed_batch needs at least one text");
    ++requests_;
    Json canonical = canonical_embed_request(texts, config_.embed_model);
    const std::string fp = util::sha256_hex(canonical_dump(canonical));

    auto decode = [&](const Json& arr) {
        std::vector<Embedding> out;
        out.reserve(arr.size());
        for (const auto& v : arr) out.push_back(v.get<Embedding>());
        return out;
    };

    if (cassette_->mode() != CassetteMode::Live) {
        if (auto hit = cassette_->lookup(fp)) {
            ++cassette_hits_;
            return decode(*hit);
        }
        if (cassette_->mode() == CassetteMode::Replay) fail(ErrorCode::CassetteMiss, fp + " (embed)");
    }

    std::string base = config_.embed_base_url.empty() ? config_.llm_base_url : config_.embed_base_url;
    if (base.empty() || config_.api_key.empty()) {
        fail(ErrorCode::InvalidConfig, "live embedding requires EMBED_BASE_URL (or LLM_BASE_URL) and LLM_API_KEY");
    }
    charge_budget();

    Json body{{"model", config_.embed_model}, {"input", texts}};
    HttpResponse resp = send_with_retries(
        {join_url(base, "/embeddings"), {{"Authorization", "Bearer " + config_.api_key}}, body.dump()});

    std::vector<Embedding> out(texts.size());
    try {
        Json parsed = Json::parse(resp.body);
        const Json& data = parsed.at("data");
        if (data.size() != texts.size()) fail(ErrorCode::TransportError, "embedding count mismatch");
        for (std::size_t i = 0; i < data.size(); ++i) {
            std::size_t idx = data[i].contains("index") ? data[i]["index"].get<std::size_t>() : i;
            if (idx >= out.size()) fail(ErrorCode::TransportError, "embedding index out of range");
            out[idx] = data[i].at("embedding").get<Embedding>();
        }
    } catch (const Json::exception& e) {
        fail(ErrorCode::TransportError, std::string("malformed embeddings body: ") + e.what());
    }
    const std::size_t dim = out.front().size();
    for (auto& v : out) {
        if (v.size() != dim || dim == 0) fail(ErrorCode::DimensionMismatch, "backend returned mixed dimensions");
        normalize(v);
    }
    cassette_->store(fp, canonical, out);
    return out;
}

}  // namespace dualmem
