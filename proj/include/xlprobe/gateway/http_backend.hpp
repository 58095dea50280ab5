#pragma once

#include <functional>
#include <string>

#include "xlprobe/gateway/backend.hpp"

namespace xlprobe::gateway {

/// Chat-completions over HTTP(S): POST {endpoint}/chat/completions with a
/// single user message, bearer auth from the model's api_key_env.
class HttpBackend final : public Backend {
public:
    using EnvLookup = std::function<const char*(const char*)>;

    explicit HttpBackend(int timeout_ms, EnvLookup env = nullptr);

    BackendReply invoke(const ModelSpec& model, const std::string& prompt, double temperature,
                        int max_tokens) override;
    bool is_network() const override { return true; }

private:
    int timeout_ms_;
    EnvLookup env_;
};

// Exposed for tests: builds the request body and parses a response body.
std::string build_chat_request(const ModelSpec& model, const std::string& prompt, double temperature,
                               int max_tokens);
BackendReply parse_chat_response(const std::string& body);

}  // namespace xlprobe::gateway
