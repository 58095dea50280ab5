#include "xlprobe/gateway/errors.hpp"

#include <array>
#include <utility>

namespace xlprobe::gateway {
namespace {

constexpr std::array<std::pair<BackendErrorKind, std::string_view>, 10> kNames{{
    {BackendErrorKind::auth, "auth"},
    {BackendErrorKind::rate_limited, "rate_limited"},
    {BackendErrorKind::timeout, "timeout"},
    {BackendErrorKind::server, "server"},
    {BackendErrorKind::client, "client"},
    {BackendErrorKind::network, "network"},
    {BackendErrorKind::unknown_scenario, "unknown_scenario"},
    {BackendErrorKind::unscripted, "unscripted"},
    {BackendErrorKind::replay_miss, "replay_miss"},
    {BackendErrorKind::offline_violation, "offline_violation"},
}};

bool default_retryable(BackendErrorKind k) {
    return k == BackendErrorKind::rate_limited || k == BackendErrorKind::timeout || k == BackendErrorKind::server;
}

}  // namespace

std::string_view to_string(BackendErrorKind k) {
    for (const auto& [kind, name] : kNames)
        if (kind == k) return name;
    return "unknown";
}

BackendErrorKind parse_backend_error_kind(std::string_view s) {
    for (const auto& [kind, name] : kNames)
        if (name == s) return kind;
    throw Error("unknown backend error kind: " + std::string(s));
}

BackendError::BackendError(BackendErrorKind kind, const std::string& message)
    : BackendError(kind, message, default_retryable(kind)) {}

BackendError::BackendError(BackendErrorKind kind, const std::string& message, bool retryable)
    : Error(std::string(to_string(kind)) + ": " + message), kind_(kind), retryable_(retryable) {}

}  // namespace xlprobe::gateway
