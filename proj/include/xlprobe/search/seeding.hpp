#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xlprobe/core/types.hpp"
#include "xlprobe/linguistics/linguist.hpp"
#include "xlprobe/search/simulate.hpp"

namespace xlprobe::search {

/// Draws `n` questions with equal shares per source dataset. Each dataset is
/// shuffled with `seed`, then datasets are visited round-robin in enum order
/// until `n` are taken; exhausted datasets drop out. Throws ConfigError,
/// listing the available counts, when `n` exceeds the source.
std::vector<QuestionRecord> sample_equally(std::span<const QuestionRecord> source, std::size_t n,
                                           std::uint64_t seed);

struct SeedDrop {
    std::string question_id;
    std::string reason;
};

struct SeedingOutcome {
    std::vector<BilingualPair> pairs;  // in sample order
    std::vector<SeedDrop> dropped;
};

/// Translates each question into `language` and keeps the pairs that pass the
/// semantic check. Translation and judging failures drop the question.
SeedingOutcome seed_pairs(const ling::Linguist& linguist, std::span<const QuestionRecord> questions,
                          const std::string& language, const Roster& roster);

}  // namespace xlprobe::search
