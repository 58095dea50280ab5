#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xlprobe {

struct SearchConfig;

enum class SourceDataset { arc, mmlu, commonsense_qa, truthful_qa, sciq, custom };

std::string_view to_string(SourceDataset d);
SourceDataset parse_source_dataset(std::string_view name);

/// An English multiple-choice question drawn from a source benchmark.
struct QuestionRecord {
    std::string id;
    SourceDataset source_dataset = SourceDataset::custom;
    std::string text;
    std::vector<std::string> choices;
    int answer_index = 0;

    void validate() const;
    bool operator==(const QuestionRecord&) const = default;
};

/// One language version of a question. The incorrect options are every
/// choice except `answer_index`.
struct LocalizedQuestion {
    std::string language;
    std::string text;
    std::vector<std::string> choices;
    int answer_index = 0;

    const std::string& correct_answer() const { return choices.at(static_cast<std::size_t>(answer_index)); }
    std::vector<int> incorrect_indices() const;

    void validate() const;
    bool operator==(const LocalizedQuestion&) const = default;
};

LocalizedQuestion to_english_question(const QuestionRecord& q);

struct PerturbationStep {
    int distractor_index = 0;
    std::string english_fragment;
    std::string target_fragment;
    std::string proxy_model;
    std::int64_t created_at_ms = 0;

    bool operator==(const PerturbationStep&) const = default;
};

/// An English question and its target-language counterpart sharing one
/// correct answer, together with the perturbations that produced it.
struct BilingualPair {
    std::string pair_id;
    std::string seed_id;
    LocalizedQuestion english;
    LocalizedQuestion target;
    int depth = 0;
    std::optional<std::string> parent_id;
    std::vector<PerturbationStep> lineage;
    // Language the pair was discovered in, set when it was re-translated into
    // another language for affinity analysis.
    std::optional<std::string> origin_language;

    const std::string& language() const { return target.language; }

    void validate() const;
    bool operator==(const BilingualPair&) const = default;
};

std::string compute_pair_id(std::string_view seed_id, std::span<const PerturbationStep> lineage,
                            std::string_view language);

BilingualPair make_seed_pair(std::string seed_id, LocalizedQuestion english, LocalizedQuestion target);

/// Child of `parent` after applying `step`; the perturbed question texts are
/// supplied by the caller.
BilingualPair extend_pair(const BilingualPair& parent, PerturbationStep step,
                          LocalizedQuestion english, LocalizedQuestion target);

struct SimulationResult {
    std::string pair_id;
    std::vector<std::string> models;
    std::vector<bool> english_correct;
    std::vector<bool> target_correct;
    double english_mean = 0.0;
    double target_mean = 0.0;
    double score = 0.0;
    double gamma = 2.0;

    void validate() const;
    bool operator==(const SimulationResult&) const = default;
};

struct CandidateRecord {
    BilingualPair pair;
    double score = 0.0;
    SimulationResult simulation;
    std::string run_id;
    int admitted_at_depth = 0;

    void validate() const;
    // Checks the invariants that depend on the run's configuration.
    void validate_against(const SearchConfig& config) const;
    bool operator==(const CandidateRecord&) const = default;
};

struct SearchRunStats {
    std::string run_id;
    std::string language;
    std::int64_t seeds_attempted = 0;
    std::int64_t seeds_converted = 0;
    std::int64_t candidates = 0;
    std::int64_t levels_explored = 0;
    std::int64_t total_pairs_scored = 0;
    double wall_time_s = 0.0;
    double dollars = 0.0;

    void validate() const;
    bool operator==(const SearchRunStats&) const = default;
};

}  // namespace xlprobe
