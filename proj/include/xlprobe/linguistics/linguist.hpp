#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "xlprobe/core/errors.hpp"
#include "xlprobe/core/model_spec.hpp"
#include "xlprobe/core/types.hpp"
#include "xlprobe/gateway/gateway.hpp"
#include "xlprobe/linguistics/templates.hpp"

namespace xlprobe {
struct SearchConfig;
}

namespace xlprobe::ling {

class LinguisticsError : public Error {
public:
    using Error::Error;
};

// Every generated fragment leaked the correct answer or came back empty.
class PerturbationError : public LinguisticsError {
public:
    using LinguisticsError::LinguisticsError;
};

class TranslationError : public LinguisticsError {
public:
    using LinguisticsError::LinguisticsError;
};

// The judge's selection matched none of the choices. Downstream this counts
// as an incorrect answer.
class UnextractableAnswer : public LinguisticsError {
public:
    using LinguisticsError::LinguisticsError;
};

class JudgeVerdictError : public LinguisticsError {
public:
    using LinguisticsError::LinguisticsError;
};

enum class Domain {
    science_technology,
    general_knowledge,
    geography_environment,
    society_culture,
    arts_literature,
    history_world_events,
};

std::string_view to_string(Domain d);
std::optional<Domain> parse_domain(std::string_view label);
const std::vector<Domain>& all_domains();

struct GenerationSettings {
    double perturbation_temperature = 0.7;
    double deterministic_temperature = 0.001;
    int max_tokens = 1024;
    int perturbation_retries = 3;

    static GenerationSettings from(const SearchConfig& config);
};

/// q with `fragment` appended to the stem after a single space.
LocalizedQuestion insert(const LocalizedQuestion& q, std::string_view fragment);

/// Prompt-level pipeline steps. Stateless apart from the gateway it calls.
class Linguist {
public:
    Linguist(gateway::Gateway& gw, const TemplateRegistry& templates, GenerationSettings settings = {});

    std::string generate_perturbation(const ModelSpec& proxy, const LocalizedQuestion& q, int distractor_index) const;
    std::string translate_fragment(const ModelSpec& translator, std::string_view fragment,
                                   const std::string& language) const;
    LocalizedQuestion translate_question(const ModelSpec& translator, const LocalizedQuestion& q,
                                         const std::string& language) const;
    bool semantic_check(const ModelSpec& judge, const LocalizedQuestion& original,
                        const LocalizedQuestion& candidate) const;
    std::string answer_question(const ModelSpec& model, const LocalizedQuestion& q) const;
    int extract_answer(const ModelSpec& judge, const LocalizedQuestion& q, std::string_view raw) const;
    // Full rewrite of the English question by the direct-perturbation template.
    std::string direct_perturbation(const ModelSpec& proxy, const LocalizedQuestion& q) const;
    // nullopt when the verdict names none of the six domains.
    std::optional<Domain> categorize(const ModelSpec& judge, const LocalizedQuestion& q) const;

    /// Builds an answering template for `language` by translating the prose
    /// of the English one line by line; placeholders and the output key are
    /// kept as they are.
    PromptTemplate generate_answer_template(const ModelSpec& translator, const std::string& language) const;

    const GenerationSettings& settings() const { return settings_; }
    const TemplateRegistry& templates() const { return templates_; }
    gateway::Gateway& gateway() const { return gw_; }

private:
    std::string call(const ModelSpec& model, const std::string& prompt, double temperature) const;

    gateway::Gateway& gw_;
    const TemplateRegistry& templates_;
    GenerationSettings settings_;
};

}  // namespace xlprobe::ling
