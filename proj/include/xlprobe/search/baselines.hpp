#pragma once

#include <span>
#include <vector>

#include "xlprobe/core/config.hpp"
#include "xlprobe/core/types.hpp"
#include "xlprobe/linguistics/linguist.hpp"
#include "xlprobe/search/beam.hpp"
#include "xlprobe/search/simulate.hpp"

namespace xlprobe::search {

struct BaselineOutcome {
    SearchRunStats stats;
    std::vector<CandidateRecord> converted;  // scored pairs that cleared the inclusion threshold
    std::vector<SearchFailure> failures;
};

/// No perturbation: score the seed pairs as they are.
BaselineOutcome baseline_np(const ling::Linguist& linguist, std::span<const BilingualPair> seeds,
                            const SearchConfig& config, const Roster& roster, const SearchOptions& options);

/// Direct perturbation: one untargeted rewrite of each English seed,
/// translated whole, semantically checked, then scored once.
BaselineOutcome baseline_dp(const ling::Linguist& linguist, std::span<const BilingualPair> seeds,
                            const SearchConfig& config, const Roster& roster, const SearchOptions& options);

}  // namespace xlprobe::search
