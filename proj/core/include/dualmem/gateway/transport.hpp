#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace dualmem {

struct HttpRequest {
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

// Sends one POST. Implementations throw TransportError when no response was
// received; HTTP error statuses are returned, not thrown.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse post(const HttpRequest& request) = 0;
};

// cpp-httplib backed transport; https needs OpenSSL at build time.
class HttpTransport final : public Transport {
public:
    explicit HttpTransport(std::chrono::seconds timeout = std::chrono::seconds(120));
    HttpResponse post(const HttpRequest& request) override;

private:
    std::chrono::seconds timeout_;
};

}  // namespace dualmem
