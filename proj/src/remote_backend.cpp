#include <cstdlib>
#include <memory>

#include <httplib.h>

#include "rhetor/errors.hpp"
#include "rhetor/gateway.hpp"

namespace rhetor {

namespace {

/// Split "scheme://host:port/prefix" into origin and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    const auto path_start =
        base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

}  // namespace

RemoteBackend::RemoteBackend(const BackendConfig& config) : config_(config) {
    if (config_.base_url.empty()) {
        throw ConfigError("remote backend requires a base URL");
    }
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw AuthConfigError("API key environment variable '" +
                                  config_.api_key_env + "' is not set");
        }
        api_key_ = key;
    }
}

std::string RemoteBackend::send(const CompletionRequest& request) {
    const auto [origin, prefix] = split_base_url(config_.base_url);
    httplib::Client client(origin);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    if (!api_key_.empty()) client.set_bearer_token_auth(api_key_);

    json body{{"model", request.model_name},
              {"messages", json::array({json{{"role", "user"},
                                             {"content", request.prompt}}})},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}};
    if (request.seed) body["seed"] = *request.seed;

    auto res = client.Post(prefix + "/chat/completions", body.dump(),
                           "application/json");
    if (!res) {
        throw TransportError("transport failure: " + httplib::to_string(res.error()));
    }
    if (res->status == 401 || res->status == 403) {
        throw AuthConfigError("backend rejected credentials (HTTP " +
                              std::to_string(res->status) + ")");
    }
    if (res->status == 408 || res->status == 429 || res->status >= 500) {
        throw TransportError("backend returned HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw ConfigError("backend returned HTTP " + std::to_string(res->status) +
                          ": " + res->body);
    }

    json parsed;
    try {
        parsed = json::parse(res->body);
    } catch (const json::parse_error& e) {
        throw TransportError(std::string("unparseable backend response: ") + e.what());
    }
    try {
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw TransportError("backend response lacks choices[0].message.content");
    }
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
    switch (config.kind) {
        case BackendKind::Mock: return std::make_shared<MockBackend>();
        case BackendKind::Remote: return std::make_shared<RemoteBackend>(config);
    }
    throw ConfigError("unknown backend kind");
}

}  // namespace rhetor
