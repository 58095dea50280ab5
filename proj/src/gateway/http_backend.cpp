#include <httplib.h>

#include "xlprobe/gateway/http_backend.hpp"

#include <cstdlib>

#include <json.hpp>

#include "xlprobe/gateway/errors.hpp"

namespace xlprobe::gateway {
namespace {

using nlohmann::json;

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // without trailing slash
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw BackendError(BackendErrorKind::client, "bad endpoint URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    SplitUrl out;
    out.origin = url.substr(0, path_start);
    out.path = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
    return out;
}

BackendError status_error(int status, const std::string& body) {
    const std::string msg = "HTTP " + std::to_string(status) + ": " + body.substr(0, 200);
    if (status == 401 || status == 403) return {BackendErrorKind::auth, msg};
    if (status == 429) return {BackendErrorKind::rate_limited, msg};
    if (status == 408) return {BackendErrorKind::timeout, msg};
    if (status >= 500) return {BackendErrorKind::server, msg};
    return {BackendErrorKind::client, msg};
}

}  // namespace

HttpBackend::HttpBackend(int timeout_ms, EnvLookup env) : timeout_ms_(timeout_ms), env_(std::move(env)) {
    if (!env_) env_ = [](const char* name) { return std::getenv(name); };
}

std::string build_chat_request(const ModelSpec& model, const std::string& prompt, double temperature,
                               int max_tokens) {
    json body{{"model", model.upstream_model()},
              {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
              {"temperature", temperature},
              {"max_tokens", max_tokens}};
    return body.dump();
}

BackendReply parse_chat_response(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw BackendError(BackendErrorKind::client, std::string("response is not JSON: ") + e.what());
    }
    BackendReply reply;
    try {
        const auto& content = j.at("choices").at(0).at("message").at("content");
        reply.text = content.is_null() ? "" : content.get<std::string>();
    } catch (const json::exception&) {
        throw BackendError(BackendErrorKind::client, "response has no choices[0].message.content");
    }
    if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
        if (auto p = u->find("prompt_tokens"); p != u->end() && p->is_number_integer())
            reply.prompt_tokens = p->get<std::int64_t>();
        if (auto c = u->find("completion_tokens"); c != u->end() && c->is_number_integer())
            reply.completion_tokens = c->get<std::int64_t>();
    }
    return reply;
}

BackendReply HttpBackend::invoke(const ModelSpec& model, const std::string& prompt, double temperature,
                                 int max_tokens) {
    if (model.api_key_env.empty())
        throw BackendError(BackendErrorKind::auth, "model '" + model.name + "' names no api_key_env");
    const char* key = env_(model.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw BackendError(BackendErrorKind::auth,
                           "environment variable " + model.api_key_env + " is not set (model '" + model.name + "')");

    const SplitUrl url = split_url(model.endpoint);
    httplib::Client client(url.origin);
    const auto secs = timeout_ms_ / 1000;
    const auto usecs = (timeout_ms_ % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    client.set_bearer_token_auth(key);

    auto res = client.Post(url.path + "/chat/completions", build_chat_request(model, prompt, temperature, max_tokens),
                           "application/json");
    if (!res) {
        const auto err = res.error();
        const std::string what = httplib::to_string(err);
        if (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout)
            throw BackendError(BackendErrorKind::timeout, what);
        throw BackendError(BackendErrorKind::network, what);
    }
    if (res->status != 200) throw status_error(res->status, res->body);
    return parse_chat_response(res->body);
}

}  // namespace xlprobe::gateway
