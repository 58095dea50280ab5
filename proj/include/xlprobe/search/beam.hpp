#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "xlprobe/core/clock.hpp"
#include "xlprobe/core/config.hpp"
#include "xlprobe/core/types.hpp"
#include "xlprobe/linguistics/linguist.hpp"
#include "xlprobe/search/simulate.hpp"

namespace xlprobe::search {

struct SearchFailure {
    std::string seed_id;
    std::string pair_id;
    int depth = 0;
    std::string stage;  // perturb, translate, simulate, verify, proxy
    std::string reason;
};

// The proxy model hard-failed; the current group is abandoned.
class ProxyFailure : public Error {
public:
    using Error::Error;
};

struct Expansion {
    std::vector<BilingualPair> children;
    std::vector<int> parent_rank;  // parallel to children
    std::vector<SearchFailure> failures;
};

/// One child per (frontier pair, selected incorrect option): perturb the
/// English side, translate only the fragment, append both. Children come
/// back ordered by (parent rank, distractor index).
Expansion expand_frontier(const ling::Linguist& linguist, std::span<const BilingualPair> frontier,
                          const Roster& roster, const SearchConfig& config, const Clock& clock);

struct ScoredChild {
    BilingualPair pair;
    SimulationResult simulation;
    int parent_rank = 0;
};

struct BeamDecision {
    std::vector<ScoredChild> frontier;  // ranked, at most beam_width
    std::vector<ScoredChild> admitted;  // in ranked order
    std::vector<std::string> discarded;  // pair ids dropped by redundancy control
    std::vector<std::string> rejected;   // pair ids that cleared the threshold but failed verification
    std::vector<std::string> closed_seeds;
    double level_max = 0.0;
    bool extend_depth = false;
};

// Decides whether a child that cleared the inclusion threshold may be admitted.
using AdmissionCheck = std::function<bool(const ScoredChild&)>;

/// Ranks children by (V desc, parent rank asc, pair id asc), admits those at
/// or above the inclusion threshold while their seed is under the redundancy
/// cap, drops every remaining child of a capped seed, and keeps the best
/// `beam_width` of the rest. `admitted_per_seed` is updated in place.
BeamDecision beam_step(std::vector<ScoredChild> children, const SearchConfig& config,
                       std::map<std::string, int>& admitted_per_seed, const AdmissionCheck& admit = nullptr);

// Per-level record of the search, for inspection and tests.
struct LevelTrace {
    std::size_t group = 0;
    int depth = 0;
    std::size_t frontier_in = 0;
    std::size_t children = 0;
    std::size_t scored = 0;
    std::size_t admitted = 0;
    double level_max = 0.0;
    int budget_after = 0;
};

struct SearchOptions {
    std::string run_id;
    std::string language;
    const Clock* clock = nullptr;  // defaults to a fixed clock at 0
};

struct SearchOutcome {
    std::vector<CandidateRecord> candidates;
    SearchRunStats stats;
    std::vector<SearchFailure> failures;
    std::vector<LevelTrace> trace;
};

/// Beam search over groups of `batch_size` seeds. Each group shares one
/// ranked pool; the depth budget starts at depth_initial and moves to
/// depth_extended once any level's best score reaches the potential
/// threshold. Admission re-checks meaning and answer with the judge.
SearchOutcome run_search(const ling::Linguist& linguist, std::span<const BilingualPair> seeds,
                         const SearchConfig& config, const Roster& roster, const SearchOptions& options);

}  // namespace xlprobe::search
