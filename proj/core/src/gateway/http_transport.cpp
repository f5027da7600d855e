#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "dualmem/error.hpp"
#include "dualmem/gateway/transport.hpp"

namespace dualmem {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) fail(ErrorCode::InvalidConfig, "URL without scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpTransport::HttpTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpResponse HttpTransport::post(const HttpRequest& request) {
    SplitUrl target = split_url(request.url);
    httplib::Client client(target.origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);

    auto result = client.Post(target.path, headers, request.body, "application/json");
    if (!result) {
        fail(ErrorCode::TransportError, "POST " + request.url + ": " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
}

}  // namespace dualmem
