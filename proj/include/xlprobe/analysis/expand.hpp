#pragma once

#include <span>
#include <string>
#include <vector>

#include "xlprobe/core/model_spec.hpp"
#include "xlprobe/core/types.hpp"
#include "xlprobe/linguistics/linguist.hpp"

namespace xlprobe::analysis {

struct ExpansionSkip {
    std::string pair_id;
    std::string language;
    std::string reason;
};

struct ExpansionResult {
    std::vector<BilingualPair> pairs;
    std::vector<ExpansionSkip> skipped;
};

/// English stem of `pair` with every lineage fragment removed. Throws
/// InvariantError if the English text does not end with its fragments.
LocalizedQuestion base_question(const BilingualPair& pair);

/// Re-translates every seed pair into every language: the base question via
/// `question_translator`, each lineage fragment via `fragment_translator`,
/// re-appended in lineage order. Output order is (seed, language); each
/// (seed, language) either yields a pair or one itemized skip.
ExpansionResult expand_candidates(const ling::Linguist& linguist, std::span<const BilingualPair> seeds,
                                  std::span<const std::string> languages, const ModelSpec& question_translator,
                                  const ModelSpec& fragment_translator);

}  // namespace xlprobe::analysis
