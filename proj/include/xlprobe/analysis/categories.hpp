#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xlprobe/core/model_spec.hpp"
#include "xlprobe/core/types.hpp"
#include "xlprobe/linguistics/linguist.hpp"
#include "xlprobe/analysis/tables.hpp"

namespace xlprobe::analysis {

struct CategoryRow {
    std::string language;
    std::array<std::int64_t, 6> counts{};  // indexed like ling::all_domains()
    std::int64_t flagged = 0;  // unparseable verdicts counted as General Knowledge

    std::int64_t total() const;
    std::array<double, 6> percentages() const;
};

struct CategoryDistribution {
    std::vector<CategoryRow> rows;  // one per language, sorted
    // Pooled over every candidate, so languages weigh by candidate count.
    CategoryRow overall;
    std::vector<std::string> failures;  // "<pair_id>\t<reason>" for backend failures

    void validate() const;
    Table to_table(const std::string& run_id) const;
};

/// Builds the distribution from (language, verdict) pairs; nullopt verdicts
/// become flagged General Knowledge entries.
CategoryDistribution aggregate_categories(std::span<const std::pair<std::string, std::optional<ling::Domain>>> labels);

/// Asks the judge for the domain of each candidate's English question.
CategoryDistribution categorize_candidates(const ling::Linguist& linguist, std::span<const CandidateRecord> candidates,
                                           const ModelSpec& judge);

}  // namespace xlprobe::analysis
