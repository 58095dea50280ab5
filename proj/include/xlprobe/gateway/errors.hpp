#pragma once

#include <string>
#include <string_view>

#include "xlprobe/core/errors.hpp"

namespace xlprobe::gateway {

enum class BackendErrorKind {
    auth,            // missing/invalid credentials; never retried
    rate_limited,    // HTTP 429
    timeout,
    server,          // HTTP 5xx
    client,          // other HTTP 4xx, malformed responses
    network,         // connection failures
    unknown_scenario,
    unscripted,      // mock had no rule and no default for the prompt
    replay_miss,     // transcript has no entry for the request
    offline_violation,
};

std::string_view to_string(BackendErrorKind k);
BackendErrorKind parse_backend_error_kind(std::string_view s);

class BackendError : public Error {
public:
    BackendError(BackendErrorKind kind, const std::string& message);
    BackendError(BackendErrorKind kind, const std::string& message, bool retryable);

    BackendErrorKind kind() const noexcept { return kind_; }
    bool retryable() const noexcept { return retryable_; }

private:
    BackendErrorKind kind_;
    bool retryable_;
};

}  // namespace xlprobe::gateway
