// remote_brain.hpp - HTTP backend for a hosted language model
#pragma once

#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "safenav/brain.hpp"

namespace safenav {

struct RemoteSettings {
    std::string endpoint;  // http://host:port/path
    std::string model;
    std::string api_key_env = "SAFENAV_API_KEY";
    double timeout_s = 60.0;
    std::string transcript_path;  // JSON lines of request/response pairs; empty disables
};

class RemoteConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Wire body: {model, system, user: [{type, content}...], response_schema}.
/// The reference and retry feedback ride along as extra user parts.
inline json render_remote_payload(const BrainRequest& request, const std::string& model) {
    json user = json::array();
    user.push_back({{"type", "camera"}, {"content", request.user.camera_text}});
    user.push_back({{"type", "lidar"}, {"content", request.user.lidar_text}});
    user.push_back({{"type", "instruction"}, {"content", request.user.instruction}});
    if (request.reference) user.push_back({{"type", "reference"}, {"content", *request.reference}});
    if (!request.retry_context.empty()) user.push_back({{"type", "retry_feedback"}, {"content", request.retry_text()}});
    return {{"model", model},
            {"system", request.system.render()},
            {"user", std::move(user)},
            {"response_schema", response_schema_text()}};
}

struct ParsedEndpoint {
    std::string base;  // scheme://host[:port]
    std::string path;
};

inline ParsedEndpoint parse_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0)
        throw RemoteConfigError("remote endpoint must be an http:// URL, got '" + url + "'");
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

class RemoteBrain : public Brain {
public:
    explicit RemoteBrain(RemoteSettings settings) : settings_(std::move(settings)) {
        if (settings_.endpoint.empty()) throw RemoteConfigError("remote brain needs brain.endpoint");
        if (settings_.model.empty()) throw RemoteConfigError("remote brain needs brain.model");
        const char* key = std::getenv(settings_.api_key_env.c_str());
        if (!key || !*key) throw RemoteConfigError("remote brain needs credentials in $" + settings_.api_key_env);
        api_key_ = key;
        endpoint_ = parse_endpoint(settings_.endpoint);
    }

    BrainResponse generate(const BrainRequest& request) override {
        const std::string body = render_remote_payload(request, settings_.model).dump();
        httplib::Client client(endpoint_.base);
        const auto secs = static_cast<time_t>(settings_.timeout_s);
        client.set_connection_timeout(secs, 0);
        client.set_read_timeout(secs, 0);
        client.set_write_timeout(secs, 0);
        httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
        auto res = client.Post(endpoint_.path, headers, body, "application/json");
        if (!res) throw BrainTransportError("request to " + settings_.endpoint + " failed: " + httplib::to_string(res.error()));
        log_exchange(body, res->status, res->body);
        if (res->status < 200 || res->status >= 300)
            throw BrainTransportError("remote brain returned HTTP " + std::to_string(res->status));

        json envelope = json::parse(res->body, nullptr, false);
        if (envelope.is_discarded() || !envelope.is_object()) throw BrainTransportError("remote reply is not a JSON object");
        std::string content;
        if (auto it = envelope.find("content"); it != envelope.end() && it->is_string()) content = it->get<std::string>();
        else if (envelope.contains("choices") && envelope["choices"].is_array() && !envelope["choices"].empty() &&
                 envelope["choices"][0].contains("message"))
            content = envelope["choices"][0]["message"].value("content", "");
        else throw BrainTransportError("remote reply carries no content");

        BrainResponse r = parse_response(content);  // SchemaError counts as a failed attempt
        if (auto u = envelope.find("usage"); u != envelope.end() && u->is_object()) {
            r.token_usage.prompt_tokens = u->value("prompt_tokens", std::int64_t{0});
            r.token_usage.completion_tokens = u->value("completion_tokens", std::int64_t{0});
        } else {
            r.token_usage.prompt_tokens = estimate_tokens(request.prompt_text().size());
            r.token_usage.completion_tokens = estimate_tokens(content.size());
        }
        return r;
    }

private:
    void log_exchange(const std::string& request, int status, const std::string& response) const {
        if (settings_.transcript_path.empty()) return;
        std::ofstream out(settings_.transcript_path, std::ios::app | std::ios::binary);
        out << json{{"request", request}, {"status", status}, {"response", response}}.dump() << "\n";
    }

    RemoteSettings settings_;
    std::string api_key_;
    ParsedEndpoint endpoint_;
};

}  // namespace safenav
