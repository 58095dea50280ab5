#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xlprobe/core/cost_ledger.hpp"
#include "xlprobe/core/types.hpp"
#include "xlprobe/analysis/tables.hpp"

namespace xlprobe::analysis {

struct CostRow {
    std::string language;
    std::vector<std::string> run_ids;
    double dollars = 0.0;
    std::int64_t candidates = 0;
    std::int64_t seeds_attempted = 0;
    std::int64_t seeds_converted = 0;

    // nullopt when there are no candidates / no attempted seeds.
    std::optional<double> dollars_per_candidate() const;
    std::optional<double> conversion_rate() const;
};

/// Per-language dollars per candidate next to the conversion rate. Runs of
/// the same language are summed before dividing. Throws InvariantError when
/// the ledger's attributions and the stats disagree on run ids, candidate
/// counts, or dollars.
std::vector<CostRow> cost_report(const CostLedger& ledger, std::span<const SearchRunStats> stats);

Table cost_table(const std::vector<CostRow>& rows);

}  // namespace xlprobe::analysis
