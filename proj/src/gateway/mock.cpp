#include "xlprobe/gateway/mock.hpp"

#include "xlprobe/gateway/errors.hpp"

namespace xlprobe::gateway {

MockScript& MockScript::on(MockPredicate when, MockResponder reply) {
    rules_.push_back({std::move(when), std::move(reply)});
    return *this;
}

MockScript& MockScript::on_text(MockPredicate when, std::string text) {
    return on(std::move(when), [t = std::move(text)](std::string_view) { return MockReply(t); });
}

MockScript& MockScript::otherwise(MockResponder reply) {
    fallback_ = std::move(reply);
    return *this;
}

MockScript& MockScript::otherwise_text(std::string text) {
    return otherwise([t = std::move(text)](std::string_view) { return MockReply(t); });
}

MockReply MockScript::respond(std::string_view scenario, std::string_view prompt) const {
    for (const auto& rule : rules_)
        if (rule.when(prompt)) return rule.reply(prompt);
    if (fallback_) return (*fallback_)(prompt);
    throw BackendError(BackendErrorKind::unscripted,
                       "unscripted prompt for mock:" + std::string(scenario) + " (" +
                           std::string(prompt.substr(0, 60)) + "...)");
}

MockPredicate contains(std::string needle) {
    return [n = std::move(needle)](std::string_view prompt) { return prompt.find(n) != std::string_view::npos; };
}

MockPredicate always() {
    return [](std::string_view) { return true; };
}

void MockBackend::register_scenario(const std::string& name, MockScript script) {
    std::lock_guard lock(mu_);
    if (scenarios_.count(name)) throw Error("mock scenario already registered: " + name);
    scenarios_.emplace(name, std::make_shared<const MockScript>(std::move(script)));
}

bool MockBackend::has_scenario(const std::string& name) const {
    std::lock_guard lock(mu_);
    return scenarios_.count(name) != 0;
}

BackendReply MockBackend::invoke(const ModelSpec& model, const std::string& prompt, double, int) {
    const std::string scenario = model.mock_scenario();
    std::shared_ptr<const MockScript> script;
    {
        std::lock_guard lock(mu_);
        auto it = scenarios_.find(scenario);
        if (it == scenarios_.end())
            throw BackendError(BackendErrorKind::unknown_scenario, "no mock scenario named '" + scenario + "'");
        script = it->second;
    }
    MockReply r = script->respond(scenario, prompt);
    return {std::move(r.text), r.prompt_tokens, r.completion_tokens};
}

}  // namespace xlprobe::gateway
