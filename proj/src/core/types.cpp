#include "xlprobe/core/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "xlprobe/core/config.hpp"
#include "xlprobe/core/errors.hpp"
#include "xlprobe/core/hash.hpp"
#include "xlprobe/core/languages.hpp"

namespace xlprobe {
namespace {

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

void check_choices(const std::vector<std::string>& choices, int answer_index, const std::string& prefix) {
    if (choices.size() < 2) throw InvariantError(prefix + "choices", "need at least 2 choices");
    if (answer_index < 0 || static_cast<std::size_t>(answer_index) >= choices.size())
        throw InvariantError(prefix + "answer_index", "out of range [0, " + std::to_string(choices.size()) + ")");
    std::set<std::string> seen;
    for (const auto& c : choices) {
        if (!seen.insert(c).second) throw InvariantError(prefix + "choices", "duplicate choice '" + c + "'");
    }
}

constexpr double kTol = 1e-12;

}  // namespace

std::string_view to_string(SourceDataset d) {
    switch (d) {
        case SourceDataset::arc: return "ARC";
        case SourceDataset::mmlu: return "MMLU";
        case SourceDataset::commonsense_qa: return "CommonsenseQA";
        case SourceDataset::truthful_qa: return "TruthfulQA";
        case SourceDataset::sciq: return "SciQ";
        case SourceDataset::custom: return "custom";
    }
    return "custom";
}

SourceDataset parse_source_dataset(std::string_view name) {
    for (auto d : {SourceDataset::arc, SourceDataset::mmlu, SourceDataset::commonsense_qa,
                   SourceDataset::truthful_qa, SourceDataset::sciq, SourceDataset::custom}) {
        if (to_string(d) == name) return d;
    }
    throw InvariantError("source_dataset", "unknown dataset '" + std::string(name) + "'");
}

void QuestionRecord::validate() const {
    if (id.empty()) throw InvariantError("id", "empty");
    if (text.empty() || blank(text)) throw InvariantError("text", "empty question text");
    check_choices(choices, answer_index, "");
}

std::vector<int> LocalizedQuestion::incorrect_indices() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(choices.size()); ++i)
        if (i != answer_index) out.push_back(i);
    return out;
}

void LocalizedQuestion::validate() const {
    if (find_language(language) == nullptr) throw InvariantError("language", "unsupported code '" + language + "'");
    if (text.empty() || blank(text)) throw InvariantError("text", "empty question text");
    check_choices(choices, answer_index, "");
}

LocalizedQuestion to_english_question(const QuestionRecord& q) {
    return LocalizedQuestion{std::string(kEnglish), q.text, q.choices, q.answer_index};
}

std::string compute_pair_id(std::string_view seed_id, std::span<const PerturbationStep> lineage,
                            std::string_view language) {
    std::vector<std::string> parts;
    parts.emplace_back(seed_id);
    parts.emplace_back(language);
    for (const auto& s : lineage) {
        parts.push_back(s.english_fragment);
        parts.push_back(s.target_fragment);
    }
    return content_id(parts);
}

BilingualPair make_seed_pair(std::string seed_id, LocalizedQuestion english, LocalizedQuestion target) {
    BilingualPair p;
    p.pair_id = compute_pair_id(seed_id, {}, target.language);
    p.seed_id = std::move(seed_id);
    p.english = std::move(english);
    p.target = std::move(target);
    return p;
}

BilingualPair extend_pair(const BilingualPair& parent, PerturbationStep step, LocalizedQuestion english,
                          LocalizedQuestion target) {
    BilingualPair child;
    child.seed_id = parent.seed_id;
    child.english = std::move(english);
    child.target = std::move(target);
    child.depth = parent.depth + 1;
    child.parent_id = parent.pair_id;
    child.lineage = parent.lineage;
    child.lineage.push_back(std::move(step));
    child.origin_language = parent.origin_language;
    child.pair_id = compute_pair_id(child.seed_id, child.lineage, child.target.language);
    return child;
}

void BilingualPair::validate() const {
    if (pair_id.empty()) throw InvariantError("pair_id", "empty");
    if (seed_id.empty()) throw InvariantError("seed_id", "empty");
    try {
        english.validate();
    } catch (const InvariantError& e) {
        throw InvariantError("english." + e.field(), e.what());
    }
    try {
        target.validate();
    } catch (const InvariantError& e) {
        throw InvariantError("target." + e.field(), e.what());
    }
    if (english.language != kEnglish) throw InvariantError("english.language", "must be 'en'");
    if (!is_target_language(target.language))
        throw InvariantError("target.language", "unsupported target language '" + target.language + "'");
    if (english.choices.size() != target.choices.size())
        throw InvariantError("target.choices", "cardinality differs from English");
    if (english.answer_index != target.answer_index)
        throw InvariantError("target.answer_index", "differs from English answer_index");
    if (depth < 0) throw InvariantError("depth", "negative");
    if (static_cast<std::size_t>(depth) != lineage.size())
        throw InvariantError("depth", "does not equal lineage length");
    if ((depth == 0) != !parent_id.has_value())
        throw InvariantError("parent_id", "must be absent exactly when depth is 0");
    for (std::size_t i = 0; i < lineage.size(); ++i) {
        const auto& s = lineage[i];
        const std::string f = "lineage[" + std::to_string(i) + "].";
        if (s.distractor_index < 0 || static_cast<std::size_t>(s.distractor_index) >= english.choices.size())
            throw InvariantError(f + "distractor_index", "out of range");
        if (s.distractor_index == english.answer_index)
            throw InvariantError(f + "distractor_index", "equals the answer index");
        if (s.english_fragment.empty() || blank(s.english_fragment))
            throw InvariantError(f + "english_fragment", "empty");
        if (s.target_fragment.empty() || blank(s.target_fragment))
            throw InvariantError(f + "target_fragment", "empty");
    }
    if (parent_id) {
        const auto prefix = std::span<const PerturbationStep>(lineage).first(lineage.size() - 1);
        if (*parent_id != compute_pair_id(seed_id, prefix, target.language))
            throw InvariantError("parent_id", "does not match the lineage prefix");
    }
    if (origin_language && !is_target_language(*origin_language))
        throw InvariantError("origin_language", "unsupported code '" + *origin_language + "'");
}

void SimulationResult::validate() const {
    if (pair_id.empty()) throw InvariantError("pair_id", "empty");
    const std::size_t k = english_correct.size();
    if (k == 0) throw InvariantError("english_correct", "no simulator results");
    if (target_correct.size() != k) throw InvariantError("target_correct", "length differs from english_correct");
    if (!models.empty() && models.size() != k) throw InvariantError("models", "length differs from results");
    if (!(gamma > 1.0)) throw InvariantError("gamma", "must exceed 1");
    const auto mean = [k](const std::vector<bool>& bits) {
        return static_cast<double>(std::count(bits.begin(), bits.end(), true)) / static_cast<double>(k);
    };
    if (std::abs(english_mean - mean(english_correct)) > kTol)
        throw InvariantError("english_mean", "is not the mean of english_correct");
    if (std::abs(target_mean - mean(target_correct)) > kTol)
        throw InvariantError("target_mean", "is not the mean of target_correct");
    if (std::abs(score - (std::pow(english_mean, gamma) - target_mean)) > kTol)
        throw InvariantError("score", "does not match english_mean^gamma - target_mean");
    if (score < -1.0 - kTol || score > 1.0 + kTol) throw InvariantError("score", "outside [-1, 1]");
}

void CandidateRecord::validate() const {
    pair.validate();
    simulation.validate();
    if (simulation.pair_id != pair.pair_id) throw InvariantError("simulation.pair_id", "does not match pair");
    if (std::abs(score - simulation.score) > kTol) throw InvariantError("score", "differs from simulation score");
    if (run_id.empty()) throw InvariantError("run_id", "empty");
    if (admitted_at_depth != pair.depth) throw InvariantError("admitted_at_depth", "differs from pair depth");
}

void CandidateRecord::validate_against(const SearchConfig& config) const {
    validate();
    if (score < config.inclusion_threshold) throw InvariantError("score", "below the inclusion threshold");
    if (admitted_at_depth > config.max_depth()) throw InvariantError("admitted_at_depth", "beyond max depth");
}

void SearchRunStats::validate() const {
    if (!is_target_language(language)) throw InvariantError("language", "unsupported code '" + language + "'");
    if (seeds_attempted < 0 || seeds_converted < 0 || candidates < 0 || levels_explored < 0 ||
        total_pairs_scored < 0)
        throw InvariantError("counts", "negative");
    if (seeds_converted > seeds_attempted) throw InvariantError("seeds_converted", "exceeds seeds_attempted");
    if (candidates < seeds_converted) throw InvariantError("candidates", "fewer than seeds_converted");
    if (wall_time_s < 0.0) throw InvariantError("wall_time_s", "negative");
    if (dollars < 0.0) throw InvariantError("dollars", "negative");
}

}  // namespace xlprobe
