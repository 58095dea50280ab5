#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xlprobe/core/model_spec.hpp"
#include "xlprobe/core/types.hpp"
#include "xlprobe/linguistics/linguist.hpp"

namespace xlprobe::search {

/// Models filling each pipeline role, resolved from a config roster. The
/// first model carrying a role fills it; every simulator takes part.
struct Roster {
    ModelSpec proxy;
    ModelSpec translator;
    // Translates perturbation fragments. Defaults to `translator`.
    ModelSpec fragment_translator;
    ModelSpec judge;
    std::vector<ModelSpec> simulators;
    std::vector<ModelSpec> targets;

    // Throws ConfigError naming the first role in `required` that no model
    // carries. Roles not listed are filled when available.
    static Roster from(const std::vector<ModelSpec>& models, std::span<const Role> required);
    static Roster for_search(const std::vector<ModelSpec>& models);
};

// A backend failed while scoring a pair, so it has no score.
class UnscoredPair : public Error {
public:
    using Error::Error;
};

// Result of scoring one pair; `result` is empty when a backend hard-failed.
struct SimulationOutcome {
    std::optional<SimulationResult> result;
    std::string failure;
};

/// Every simulator answers both language versions of every pair (2K answer
/// calls per pair, all issued concurrently through the gateway). Answers the
/// judge cannot map to a choice count as incorrect.
std::vector<SimulationOutcome> simulate_many(const ling::Linguist& linguist, std::span<const BilingualPair> pairs,
                                             std::span<const ModelSpec> simulators, const ModelSpec& judge,
                                             double gamma);

/// Single-pair form; throws UnscoredPair if a backend failed.
SimulationResult simulate(const ling::Linguist& linguist, const BilingualPair& pair,
                          std::span<const ModelSpec> simulators, const ModelSpec& judge, double gamma);

/// Throws MissingTemplate unless `language` has its own answering template.
void require_answer_template(const ling::Linguist& linguist, const std::string& language);

// Builds a result from raw correctness bits.
SimulationResult make_result(std::string pair_id, std::vector<std::string> models, std::vector<bool> english_correct,
                             std::vector<bool> target_correct, double gamma);

}  // namespace xlprobe::search
