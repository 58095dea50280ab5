#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlprobe/core/model_spec.hpp"
#include "xlprobe/core/types.hpp"
#include "xlprobe/gateway/gateway.hpp"

namespace xlprobe::harness {

/// Knobs of the scripted offline backends. Read from the `offline` object of
/// a run config; unknown keys are rejected.
struct ScenarioOptions {
    int simulators = 5;
    // Simulators 0..failing_simulators-1 answer wrongly in the target
    // language when the question carries the trap marker.
    int failing_simulators = 5;
    std::string trap_marker = "almanac";
    // Plant the trap for every distractor, not only the designated one.
    bool trap_all_distractors = false;
    // Every n-th seed (by bank order) gets the trap from a direct rewrite;
    // 0 disables.
    int direct_trap_every = 4;
    // Simulators fail every target-language question, perturbed or not.
    bool translation_breaks = false;
    bool judge_rejects = false;
    // Usage reported with every scripted reply; nullopt leaves usage out so
    // the gateway estimates it.
    std::optional<std::int64_t> prompt_tokens;
    std::optional<std::int64_t> completion_tokens;

    static ScenarioOptions from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Deterministic synthetic multiple-choice bank spread over the five source
/// datasets. Correct answers never occur inside other options.
std::vector<QuestionRecord> synthetic_questions(int n, int choices = 4);

/// Scripted proxy, translator, judge and simulator backends.
///
/// Translations prefix "[xx] " to every string. The proxy plants the trap
/// marker only when asked to perturb towards a question's designated trap
/// option (its last incorrect option). Simulators look the question up in
/// the bank by its choices and answer correctly, except as configured above.
class OfflineHarness {
public:
    explicit OfflineHarness(ScenarioOptions options = {});

    // Questions the scripted backends know the answers to.
    void add_question(const LocalizedQuestion& english);
    void add_questions(const std::vector<QuestionRecord>& questions);

    // Registers every scenario on `gw`.
    void install(gateway::Gateway& gw) const;

    // Roster matching install(): proxy, translator, judge, sim-0..K-1 (the
    // simulators also carry the target role). Prices are zero.
    std::vector<ModelSpec> roster() const;

    // Backend invocations per scenario name, counted inside the scripts.
    std::int64_t invocations(const std::string& scenario) const;
    std::map<std::string, std::int64_t> all_invocations() const;

    const ScenarioOptions& options() const { return options_; }

    // Index of the designated trap option for a bank question.
    static int trap_index(const LocalizedQuestion& q);

private:
    struct Entry {
        std::string text;
        std::vector<std::string> choices;
        int answer_index = 0;
        std::size_t ordinal = 0;
    };
    struct State {
        mutable std::mutex mu;
        std::vector<Entry> entries;
        std::map<std::string, std::int64_t> calls;
    };

    const Entry* find_by_choices(const std::vector<std::string>& english_choices) const;
    const Entry* find_by_text_prefix(const std::string& text) const;
    void count(const std::string& scenario) const;
    gateway::MockReply reply(std::string text) const;

    ScenarioOptions options_;
    std::shared_ptr<State> state_;
};

}  // namespace xlprobe::harness
