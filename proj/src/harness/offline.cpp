#include "xlprobe/harness/offline.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "xlprobe/core/errors.hpp"
#include "xlprobe/core/languages.hpp"
#include "xlprobe/linguistics/linguist.hpp"
#include "xlprobe/linguistics/parsing.hpp"

namespace xlprobe::harness {
namespace {

using nlohmann::json;

// Text between the line holding `start` and the line holding `end`.
std::string section(std::string_view prompt, std::string_view start, std::string_view end) {
    auto s = prompt.find(start);
    if (s == std::string_view::npos) return {};
    s = prompt.find('\n', s);
    if (s == std::string_view::npos) return {};
    const auto e = prompt.find(end, s);
    if (e == std::string_view::npos) return {};
    std::string_view body = prompt.substr(s + 1, e - s - 1);
    while (!body.empty() && (body.back() == '\n' || body.back() == ' ')) body.remove_suffix(1);
    return std::string(body);
}

bool has(std::string_view prompt, std::string_view needle) { return prompt.find(needle) != std::string_view::npos; }

// Target language named in a translation prompt's instruction.
std::string detect_language(std::string_view prompt) {
    const std::string_view head = prompt.substr(0, prompt.find("[The Start of the Text]"));
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 4> native{{
        {"en français", "fr"}, {"ins Deutsche", "de"}, {"in italiano", "it"}, {"al español", "es"}}};
    for (const auto& [marker, code] : native)
        if (has(head, marker)) return std::string(code);
    for (const auto& info : target_languages())
        if (has(head, "into " + std::string(info.english_name))) return std::string(info.code);
    return "xx";
}

std::optional<std::vector<std::string>> find_choices_line(std::string_view prompt) {
    std::size_t start = 0;
    while (start < prompt.size()) {
        auto end = prompt.find('\n', start);
        if (end == std::string_view::npos) end = prompt.size();
        const std::string_view line = prompt.substr(start, end - start);
        if (!line.empty() && line.front() == '[') {
            auto j = json::parse(line, nullptr, false);
            if (!j.is_discarded() && j.is_array() && !j.empty() &&
                std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_string(); }))
                return j.get<std::vector<std::string>>();
        }
        start = end + 1;
    }
    return std::nullopt;
}

// "[xx] text" -> ("xx", "text").
std::optional<std::pair<std::string, std::string>> split_prefix(const std::string& s) {
    if (s.size() >= 5 && s[0] == '[' && s[3] == ']' && s[4] == ' ') return std::make_pair(s.substr(1, 2), s.substr(5));
    return std::nullopt;
}

std::string_view domain_for(std::string_view text) {
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 5> keywords{{
        {"physics", "Science & Technology"},
        {"river", "Geography & Environment"},
        {"empire", "History & World Events"},
        {"poetry", "Arts & Literature"},
        {"customs", "Society & Culture"},
    }};
    for (const auto& [k, d] : keywords)
        if (has(text, k)) return d;
    return "General Knowledge";
}

}  // namespace

ScenarioOptions ScenarioOptions::from_json(const json& j) {
    ScenarioOptions o;
    if (!j.is_object()) throw ConfigError("offline options must be an object");
    for (const auto& [key, v] : j.items()) {
        try {
            if (key == "simulators") o.simulators = v.get<int>();
            else if (key == "failing_simulators") o.failing_simulators = v.get<int>();
            else if (key == "trap_marker") o.trap_marker = v.get<std::string>();
            else if (key == "trap_all_distractors") o.trap_all_distractors = v.get<bool>();
            else if (key == "direct_trap_every") o.direct_trap_every = v.get<int>();
            else if (key == "translation_breaks") o.translation_breaks = v.get<bool>();
            else if (key == "judge_rejects") o.judge_rejects = v.get<bool>();
            else if (key == "prompt_tokens") o.prompt_tokens = v.get<std::int64_t>();
            else if (key == "completion_tokens") o.completion_tokens = v.get<std::int64_t>();
            else throw ConfigError("unknown offline option '" + key + "'");
        } catch (const json::exception& e) {
            throw ConfigError("offline option '" + key + "': " + e.what());
        }
    }
    if (o.simulators < 1) throw ConfigError("offline.simulators must be >= 1");
    if (o.failing_simulators < 0 || o.failing_simulators > o.simulators)
        throw ConfigError("offline.failing_simulators must lie in [0, simulators]");
    if (o.trap_marker.empty()) throw ConfigError("offline.trap_marker must be non-empty");
    if (o.direct_trap_every < 0) throw ConfigError("offline.direct_trap_every must be >= 0");
    return o;
}

json ScenarioOptions::to_json() const {
    json j{{"simulators", simulators},
           {"failing_simulators", failing_simulators},
           {"trap_marker", trap_marker},
           {"trap_all_distractors", trap_all_distractors},
           {"direct_trap_every", direct_trap_every},
           {"translation_breaks", translation_breaks},
           {"judge_rejects", judge_rejects}};
    if (prompt_tokens) j["prompt_tokens"] = *prompt_tokens;
    if (completion_tokens) j["completion_tokens"] = *completion_tokens;
    return j;
}

std::vector<QuestionRecord> synthetic_questions(int n, int choices) {
    static constexpr std::array<std::string_view, 6> phrases{
        "physics laboratory inventory", "river survey of the northern basin", "records of the old empire",
        "poetry anthology index",       "customs register of the guild",      "general trivia ledger"};
    static constexpr std::array<std::string_view, 8> labels{"amber", "birch", "cobalt", "dune",
                                                            "ember", "fjord", "garnet", "harbor"};
    static constexpr std::array<SourceDataset, 5> datasets{SourceDataset::arc, SourceDataset::mmlu,
                                                           SourceDataset::commonsense_qa, SourceDataset::truthful_qa,
                                                           SourceDataset::sciq};
    if (choices < 2 || choices > static_cast<int>(labels.size())) throw ConfigError("choices must lie in [2, 8]");
    std::vector<QuestionRecord> out;
    for (int i = 0; i < n; ++i) {
        QuestionRecord q;
        char id[16];
        std::snprintf(id, sizeof id, "q%04d", i);
        q.id = id;
        q.source_dataset = datasets[static_cast<std::size_t>(i) % datasets.size()];
        q.text = "In the " + std::string(phrases[static_cast<std::size_t>(i) % phrases.size()]) +
                 ", which label was assigned to specimen " + std::to_string(i) + "?";
        for (int c = 0; c < choices; ++c)
            q.choices.push_back(std::string(labels[static_cast<std::size_t>(c)]) + "-" + std::to_string(i));
        q.answer_index = i % choices;
        q.validate();
        out.push_back(std::move(q));
    }
    return out;
}

OfflineHarness::OfflineHarness(ScenarioOptions options)
    : options_(std::move(options)), state_(std::make_shared<State>()) {}

void OfflineHarness::add_question(const LocalizedQuestion& english) {
    std::lock_guard lock(state_->mu);
    for (const auto& e : state_->entries)
        if (e.choices == english.choices) return;
    state_->entries.push_back({english.text, english.choices, english.answer_index, state_->entries.size()});
}

void OfflineHarness::add_questions(const std::vector<QuestionRecord>& questions) {
    for (const auto& q : questions) add_question(to_english_question(q));
}

const OfflineHarness::Entry* OfflineHarness::find_by_choices(const std::vector<std::string>& english_choices) const {
    std::lock_guard lock(state_->mu);
    for (const auto& e : state_->entries)
        if (e.choices == english_choices) return &e;
    return nullptr;
}

const OfflineHarness::Entry* OfflineHarness::find_by_text_prefix(const std::string& text) const {
    std::lock_guard lock(state_->mu);
    const Entry* best = nullptr;
    for (const auto& e : state_->entries)
        if (text.rfind(e.text, 0) == 0 && (!best || e.text.size() > best->text.size())) best = &e;
    return best;
}

void OfflineHarness::count(const std::string& scenario) const {
    std::lock_guard lock(state_->mu);
    ++state_->calls[scenario];
}

std::int64_t OfflineHarness::invocations(const std::string& scenario) const {
    std::lock_guard lock(state_->mu);
    auto it = state_->calls.find(scenario);
    return it == state_->calls.end() ? 0 : it->second;
}

std::map<std::string, std::int64_t> OfflineHarness::all_invocations() const {
    std::lock_guard lock(state_->mu);
    return state_->calls;
}

gateway::MockReply OfflineHarness::reply(std::string text) const {
    gateway::MockReply r(std::move(text));
    r.prompt_tokens = options_.prompt_tokens;
    r.completion_tokens = options_.completion_tokens;
    return r;
}

int OfflineHarness::trap_index(const LocalizedQuestion& q) {
    const int last = static_cast<int>(q.choices.size()) - 1;
    return q.answer_index == last ? last - 1 : last;
}

void OfflineHarness::install(gateway::Gateway& gw) const {
    const OfflineHarness self = *this;  // scripts share state_ with this object

    gw.register_mock("translator", gateway::MockScript().otherwise([self](std::string_view prompt) {
        self.count("translator");
        const std::string prefix = "[" + detect_language(prompt) + "] ";
        const std::string text = section(prompt, "[The Start of the Text]", "[The End of the Text]");
        if (has(prompt, "[The Start of the Choices]")) {
            json choices = json::parse(section(prompt, "[The Start of the Choices]", "[The End of the Choices]"),
                                       nullptr, false);
            json out_choices = json::array();
            if (choices.is_array())
                for (const auto& c : choices) out_choices.push_back(prefix + c.get<std::string>());
            const std::string answer = section(prompt, "[The Start of the Answer]", "[The End of the Answer]");
            return self.reply(json{{"text", prefix + text}, {"choices", out_choices}, {"answer", prefix + answer}}.dump());
        }
        return self.reply(json{{"translation", prefix + text}}.dump());
    }));

    gw.register_mock("judge", gateway::MockScript().otherwise([self](std::string_view prompt) {
        self.count("judge");
        if (has(prompt, "[The Start of the Candidate Question]")) {
            const char* v = self.options_.judge_rejects ? "no" : "yes";
            return self.reply(json{{"semantic_equivalent", v}, {"answer_consistent", v}}.dump());
        }
        if (has(prompt, "classifying exam questions by subject")) {
            const std::string q = section(prompt, "[The Start of the Question]", "[The End of the Question]");
            return self.reply(json{{"category", domain_for(q)}}.dump());
        }
        const std::string raw =
            section(prompt, "[The Start of the Model's Answer]", "[The End of the Model's Answer]");
        std::string selected = "none of the above";
        if (auto obj = ling::extract_json_object(raw); obj && obj->contains("final_answer") &&
                                                       (*obj)["final_answer"].is_string())
            selected = (*obj)["final_answer"].get<std::string>();
        return self.reply(json{{"final_answer", selected}}.dump());
    }));

    gw.register_mock("proxy", gateway::MockScript().otherwise([self](std::string_view prompt) {
        self.count("proxy");
        const std::string question = section(prompt, "[The Start of the Question]", "[The End of the Question]");
        const Entry* entry = self.find_by_text_prefix(question);
        const std::string& marker = self.options_.trap_marker;
        if (has(prompt, "[The Start of the Incorrect Option]")) {
            const std::string wrong =
                section(prompt, "[The Start of the Incorrect Option]", "[The End of the Incorrect Option]");
            bool trap = false;
            if (entry) {
                LocalizedQuestion q{"en", entry->text, entry->choices, entry->answer_index};
                trap = self.options_.trap_all_distractors ||
                       wrong == entry->choices[static_cast<std::size_t>(trap_index(q))];
            }
            const std::string fragment = trap ? "An old " + marker + " once linked this puzzle to " + wrong + "."
                                              : "Some collectors also catalogue " + wrong + " next to it.";
            return self.reply("{Generated Distraction: " + fragment + "}");
        }
        const bool trap = entry && self.options_.direct_trap_every > 0 &&
                          entry->ordinal % static_cast<std::size_t>(self.options_.direct_trap_every) == 0;
        return self.reply("New question: Scholars have long debated this topic. " + question +
                          (trap ? " An old " + marker + " entry discusses a related case."
                                : " Practical examples appear in many textbooks."));
    }));

    for (int i = 0; i < options_.simulators; ++i) {
        const std::string name = "sim-" + std::to_string(i);
        gw.register_mock(name, gateway::MockScript().otherwise([self, name, i](std::string_view prompt) {
            self.count(name);
            auto shown = find_choices_line(prompt);
            if (!shown) return self.reply("I cannot find any options.");
            std::vector<std::string> english = *shown;
            bool target_language = false;
            for (auto& c : english)
                if (auto split = split_prefix(c)) {
                    c = split->second;
                    target_language = true;
                }
            const Entry* entry = self.find_by_choices(english);
            if (!entry) return self.reply("I do not recognise this question.");
            const bool fail =
                target_language && (self.options_.translation_breaks ||
                                    (i < self.options_.failing_simulators && has(prompt, self.options_.trap_marker)));
            const std::size_t n = entry->choices.size();
            const std::size_t pick =
                fail ? (static_cast<std::size_t>(entry->answer_index) + 1) % n : static_cast<std::size_t>(entry->answer_index);
            return self.reply("Let me weigh each option in turn.\n" +
                              json{{"final_answer", (*shown)[pick]}}.dump());
        }));
    }
}

std::vector<ModelSpec> OfflineHarness::roster() const {
    auto spec = [](std::string name, std::set<Role> roles) {
        ModelSpec m;
        m.endpoint = "mock:" + name;
        m.name = std::move(name);
        m.roles = std::move(roles);
        return m;
    };
    std::vector<ModelSpec> out{spec("proxy", {Role::proxy}), spec("translator", {Role::translator}),
                               spec("judge", {Role::judge})};
    for (int i = 0; i < options_.simulators; ++i)
        out.push_back(spec("sim-" + std::to_string(i), {Role::simulator, Role::target}));
    return out;
}

}  // namespace xlprobe::harness
