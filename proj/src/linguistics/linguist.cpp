#include "xlprobe/linguistics/linguist.hpp"

#include <algorithm>
#include <array>

#include "xlprobe/core/config.hpp"
#include "xlprobe/core/languages.hpp"
#include "xlprobe/linguistics/parsing.hpp"

namespace xlprobe::ling {
namespace {

using nlohmann::json;

constexpr std::array<std::pair<Domain, std::string_view>, 6> kDomains{{
    {Domain::science_technology, "Science & Technology"},
    {Domain::general_knowledge, "General Knowledge"},
    {Domain::geography_environment, "Geography & Environment"},
    {Domain::society_culture, "Society & Culture"},
    {Domain::arts_literature, "Arts & Literature"},
    {Domain::history_world_events, "History & World Events"},
}};

// Text following `marker` (case-insensitive), or nullopt when absent.
std::optional<std::string> after_marker(std::string_view text, std::string_view marker) {
    const std::string folded = casefold(text);
    const auto pos = folded.find(casefold(marker));
    if (pos == std::string::npos) return std::nullopt;
    std::string_view rest = text.substr(pos + marker.size());
    while (!rest.empty() && (rest.front() == ':' || rest.front() == ' ')) rest.remove_prefix(1);
    return std::string(rest);
}

std::string parse_distraction(std::string_view text) {
    auto rest = after_marker(text, "Generated Distraction");
    std::string s = rest ? *rest : std::string(text);
    s = normalize_ws(s);
    if (rest) {
        // "{Generated Distraction: ...}" leaves an unmatched closing brace.
        const auto opens = std::count(s.begin(), s.end(), '{');
        const auto closes = std::count(s.begin(), s.end(), '}');
        if (!s.empty() && s.back() == '}' && closes > opens) s.pop_back();
    }
    return strip_wrapping(s);
}

std::optional<bool> parse_yes_no(const json& v) {
    if (v.is_boolean()) return v.get<bool>();
    if (!v.is_string()) return std::nullopt;
    const std::string s = casefold(strip_wrapping(v.get<std::string>()));
    if (s == "yes" || s == "true") return true;
    if (s == "no" || s == "false") return false;
    return std::nullopt;
}

std::string language_name(const std::string& code) {
    const auto* info = find_language(code);
    if (!info) throw ConfigError("unsupported language code '" + code + "'");
    return std::string(info->english_name);
}

}  // namespace

std::string_view to_string(Domain d) {
    for (const auto& [k, name] : kDomains)
        if (k == d) return name;
    return "unknown";
}

std::optional<Domain> parse_domain(std::string_view label) {
    auto canon = [](std::string_view s) {
        std::string c = casefold(strip_wrapping(s));
        if (auto p = c.find(" and "); p != std::string::npos) c.replace(p, 5, " & ");
        return c;
    };
    const std::string want = canon(label);
    for (const auto& [k, name] : kDomains)
        if (canon(name) == want) return k;
    return std::nullopt;
}

const std::vector<Domain>& all_domains() {
    static const std::vector<Domain> v = [] {
        std::vector<Domain> out;
        for (const auto& [k, n] : kDomains) out.push_back(k);
        return out;
    }();
    return v;
}

GenerationSettings GenerationSettings::from(const SearchConfig& config) {
    GenerationSettings s;
    s.perturbation_temperature = config.perturbation_temperature;
    s.deterministic_temperature = config.deterministic_temperature;
    s.max_tokens = config.max_output_tokens;
    s.perturbation_retries = config.perturbation_retries;
    return s;
}

LocalizedQuestion insert(const LocalizedQuestion& q, std::string_view fragment) {
    if (is_blank(fragment)) throw InvariantError("fragment", "empty perturbation fragment");
    LocalizedQuestion out = q;
    out.text.reserve(q.text.size() + 1 + fragment.size());
    out.text += ' ';
    out.text += fragment;
    return out;
}

Linguist::Linguist(gateway::Gateway& gw, const TemplateRegistry& templates, GenerationSettings settings)
    : gw_(gw), templates_(templates), settings_(settings) {}

std::string Linguist::call(const ModelSpec& model, const std::string& prompt, double temperature) const {
    return gw_.complete(model, prompt, temperature, settings_.max_tokens).text;
}

std::string Linguist::generate_perturbation(const ModelSpec& proxy, const LocalizedQuestion& q,
                                            int distractor_index) const {
    if (distractor_index < 0 || static_cast<std::size_t>(distractor_index) >= q.choices.size())
        throw InvariantError("distractor_index", "out of range");
    if (distractor_index == q.answer_index) throw InvariantError("distractor_index", "equals the answer index");

    const std::string prompt = templates_.get(TemplateId::perturb, std::string(kEnglish))
                                   .render({{"question", q.text},
                                            {"answer", q.correct_answer()},
                                            {"wrong_answer", q.choices[static_cast<std::size_t>(distractor_index)]}});
    const std::string answer = casefold(normalize_ws(q.correct_answer()));
    std::string last_problem;
    for (int attempt = 0; attempt <= settings_.perturbation_retries; ++attempt) {
        const std::string fragment = parse_distraction(call(proxy, prompt, settings_.perturbation_temperature));
        if (fragment.empty()) {
            last_problem = "empty fragment";
            continue;
        }
        if (casefold(fragment).find(answer) != std::string::npos) {
            last_problem = "fragment contains the correct answer";
            continue;
        }
        return fragment;
    }
    throw PerturbationError("no usable perturbation after " + std::to_string(settings_.perturbation_retries + 1) +
                            " attempts (" + last_problem + ")");
}

std::string Linguist::translate_fragment(const ModelSpec& translator, std::string_view fragment,
                                         const std::string& language) const {
    if (is_blank(fragment)) throw InvariantError("fragment", "blank fragment");
    require_target_language(language);
    const std::string prompt = templates_.get(TemplateId::translate_fragment, language)
                                   .render({{"fragment", std::string(fragment)}, {"language_name", language_name(language)}});
    const std::string reply = call(translator, prompt, settings_.deterministic_temperature);
    std::string out;
    if (auto obj = extract_json_object(reply); obj && obj->contains("translation") && (*obj)["translation"].is_string())
        out = normalize_ws((*obj)["translation"].get<std::string>());
    else
        out = strip_wrapping(reply);
    if (out.empty()) throw TranslationError("empty fragment translation into " + language);
    return out;
}

LocalizedQuestion Linguist::translate_question(const ModelSpec& translator, const LocalizedQuestion& q,
                                               const std::string& language) const {
    if (q.language != kEnglish) throw InvariantError("language", "translate_question expects an English question");
    require_target_language(language);
    const std::string prompt = templates_.get(TemplateId::translate_question, language)
                                   .render({{"question", q.text},
                                            {"choices", render_choices(q.choices)},
                                            {"ground_truth", q.correct_answer()},
                                            {"language_name", language_name(language)}});
    const std::string reply = call(translator, prompt, settings_.deterministic_temperature);

    auto obj = extract_json_object(reply);
    if (!obj) throw TranslationError("translator output has no JSON object");
    const json& j = *obj;
    if (!j.contains("text") || !j["text"].is_string() || !j.contains("choices") || !j["choices"].is_array() ||
        !j.contains("answer") || !j["answer"].is_string())
        throw TranslationError("translator output lacks text/choices/answer");

    LocalizedQuestion out;
    out.language = language;
    out.text = normalize_ws(j["text"].get<std::string>());
    for (const auto& c : j["choices"]) {
        if (!c.is_string()) throw TranslationError("translated choice is not a string");
        out.choices.push_back(normalize_ws(c.get<std::string>()));
    }
    if (out.choices.size() != q.choices.size())
        throw TranslationError("translated choice count " + std::to_string(out.choices.size()) + " differs from " +
                               std::to_string(q.choices.size()));
    const std::string answer = normalize_ws(j["answer"].get<std::string>());
    std::vector<int> matches;
    for (std::size_t i = 0; i < out.choices.size(); ++i)
        if (out.choices[i] == answer) matches.push_back(static_cast<int>(i));
    if (matches.empty()) throw TranslationError("translated answer '" + answer + "' matches no translated choice");
    if (matches.size() > 1) throw TranslationError("translated answer matches several translated choices");
    if (matches.front() != q.answer_index)
        throw TranslationError("translated answer sits at index " + std::to_string(matches.front()) + ", expected " +
                               std::to_string(q.answer_index));
    out.answer_index = q.answer_index;
    try {
        out.validate();
    } catch (const InvariantError& e) {
        throw TranslationError(std::string("translation rejected: ") + e.what());
    }
    return out;
}

bool Linguist::semantic_check(const ModelSpec& judge, const LocalizedQuestion& original,
                              const LocalizedQuestion& candidate) const {
    if (is_blank(original.text) || is_blank(candidate.text))
        throw InvariantError("text", "semantic_check needs non-empty questions");
    if (original == candidate) return true;
    const std::string prompt = templates_.get(TemplateId::semantic_check, std::string(kEnglish))
                                   .render({{"original_question", original.text},
                                            {"original_choices", render_choices(original.choices)},
                                            {"original_answer", original.correct_answer()},
                                            {"candidate_question", candidate.text},
                                            {"candidate_choices", render_choices(candidate.choices)},
                                            {"candidate_answer", candidate.correct_answer()}});
    const std::string reply = call(judge, prompt, settings_.deterministic_temperature);
    auto obj = extract_json_object(reply);
    if (!obj || !obj->contains("semantic_equivalent") || !obj->contains("answer_consistent"))
        throw JudgeVerdictError("semantic check verdict is not parseable");
    const auto meaning = parse_yes_no((*obj)["semantic_equivalent"]);
    const auto answer = parse_yes_no((*obj)["answer_consistent"]);
    if (!meaning || !answer) throw JudgeVerdictError("semantic check verdict is not yes/no");
    return *meaning && *answer;
}

std::string Linguist::answer_question(const ModelSpec& model, const LocalizedQuestion& q) const {
    const auto& t = templates_.get(TemplateId::answer_zero_shot, q.language);
    const std::string prompt = t.render({{"question", q.text}, {"choices", render_choices(q.choices)}});
    return call(model, prompt, settings_.deterministic_temperature);
}

int Linguist::extract_answer(const ModelSpec& judge, const LocalizedQuestion& q, std::string_view raw) const {
    if (is_blank(raw)) throw InvariantError("raw", "empty model answer");
    const std::string prompt = templates_.get(TemplateId::extract_answer, std::string(kEnglish))
                                   .render({{"question", q.text},
                                            {"answer", std::string(raw)},
                                            {"choices", render_choices(q.choices)}});
    const std::string reply = call(judge, prompt, settings_.deterministic_temperature);

    std::string selected;
    if (auto obj = extract_json_object(reply); obj && obj->contains("final_answer")) {
        const json& v = (*obj)["final_answer"];
        selected = v.is_string() ? v.get<std::string>() : v.dump();
    } else if (auto rest = after_marker(reply, "\"final_answer\"")) {
        // The output format leaves the value unquoted, which is not valid JSON.
        std::string s = *rest;
        if (auto close = s.rfind('}'); close != std::string::npos) s.erase(close);
        selected = s;
    } else {
        selected = reply;
    }
    selected = strip_wrapping(selected);
    for (std::size_t i = 0; i < q.choices.size(); ++i)
        if (normalize_ws(q.choices[i]) == selected) return static_cast<int>(i);
    // Case-insensitive fallback, only when it is unambiguous.
    int found = -1;
    for (std::size_t i = 0; i < q.choices.size(); ++i) {
        if (casefold(normalize_ws(q.choices[i])) != casefold(selected)) continue;
        if (found >= 0) {
            found = -1;
            break;
        }
        found = static_cast<int>(i);
    }
    if (found >= 0) return found;
    throw UnextractableAnswer("judge selected '" + selected.substr(0, 80) + "', which matches no choice");
}

std::string Linguist::direct_perturbation(const ModelSpec& proxy, const LocalizedQuestion& q) const {
    const std::string prompt =
        templates_.get(TemplateId::direct_perturb_baseline, std::string(kEnglish)).render({{"question", q.text}});
    const std::string reply = call(proxy, prompt, settings_.perturbation_temperature);
    auto rest = after_marker(reply, "New question");
    std::string out = strip_wrapping(rest ? *rest : reply);
    if (out.empty()) throw PerturbationError("direct perturbation returned an empty question");
    return out;
}

std::optional<Domain> Linguist::categorize(const ModelSpec& judge, const LocalizedQuestion& q) const {
    const std::string prompt = templates_.get(TemplateId::categorize, std::string(kEnglish))
                                   .render({{"question", q.text}, {"choices", render_choices(q.choices)}});
    const std::string reply = call(judge, prompt, settings_.deterministic_temperature);
    if (auto obj = extract_json_object(reply); obj && obj->contains("category") && (*obj)["category"].is_string())
        return parse_domain((*obj)["category"].get<std::string>());
    return parse_domain(reply);
}

PromptTemplate Linguist::generate_answer_template(const ModelSpec& translator, const std::string& language) const {
    require_target_language(language);
    const auto& source = templates_.get(TemplateId::answer_zero_shot, std::string(kEnglish));
    const std::string output_prefix = "{\"final_answer\": \"";
    std::string body;
    std::size_t start = 0;
    while (start <= source.body.size()) {
        auto end = source.body.find('\n', start);
        if (end == std::string::npos) end = source.body.size();
        const std::string line = source.body.substr(start, end - start);
        std::string out;
        if (is_blank(line) || (line.size() > 2 && line.front() == '{' && line.back() == '}' &&
                               line.find('"') == std::string::npos)) {
            out = line;  // blank or a bare placeholder
        } else if (line.rfind(output_prefix, 0) == 0 && line.size() > output_prefix.size() + 2) {
            std::string inner = line.substr(output_prefix.size(), line.size() - output_prefix.size() - 2);
            inner = strip_wrapping(inner);
            out = output_prefix + "<" + translate_fragment(translator, inner, language) + ">\"}";
        } else if (line.size() > 2 && line.front() == '[' && line.back() == ']') {
            out = "[" + translate_fragment(translator, line.substr(1, line.size() - 2), language) + "]";
        } else {
            out = translate_fragment(translator, line, language);
        }
        body += out;
        if (end < source.body.size()) body += '\n';
        start = end + 1;
    }
    PromptTemplate t{TemplateId::answer_zero_shot, language, body};
    t.validate();
    return t;
}

}  // namespace xlprobe::ling
