#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xlprobe/gateway/backend.hpp"

namespace xlprobe::gateway {

struct MockReply {
    std::string text;
    std::optional<std::int64_t> prompt_tokens;
    std::optional<std::int64_t> completion_tokens;

    MockReply() = default;
    MockReply(std::string t) : text(std::move(t)) {}  // NOLINT: implicit by intent
    MockReply(const char* t) : text(t) {}             // NOLINT
};

using MockPredicate = std::function<bool(std::string_view prompt)>;
// May throw BackendError to script a failure.
using MockResponder = std::function<MockReply(std::string_view prompt)>;

struct MockRule {
    MockPredicate when;
    MockResponder reply;
};

/// Scripted behaviour of a `mock:<scenario>` endpoint. Rules are tried in
/// order; the first matching predicate answers. Responders must be
/// thread-safe.
class MockScript {
public:
    MockScript& on(MockPredicate when, MockResponder reply);
    MockScript& on_text(MockPredicate when, std::string text);
    MockScript& otherwise(MockResponder reply);
    MockScript& otherwise_text(std::string text);

    MockReply respond(std::string_view scenario, std::string_view prompt) const;

private:
    std::vector<MockRule> rules_;
    std::optional<MockResponder> fallback_;
};

MockPredicate contains(std::string needle);
MockPredicate always();

class MockBackend final : public Backend {
public:
    void register_scenario(const std::string& name, MockScript script);
    bool has_scenario(const std::string& name) const;

    BackendReply invoke(const ModelSpec& model, const std::string& prompt, double temperature,
                        int max_tokens) override;

private:
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<const MockScript>> scenarios_;
};

}  // namespace xlprobe::gateway
