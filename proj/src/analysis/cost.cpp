#include "xlprobe/analysis/cost.hpp"

#include <cmath>
#include <map>
#include <set>

#include "xlprobe/core/errors.hpp"

namespace xlprobe::analysis {

std::optional<double> CostRow::dollars_per_candidate() const {
    if (candidates <= 0) return std::nullopt;
    return dollars / static_cast<double>(candidates);
}

std::optional<double> CostRow::conversion_rate() const {
    if (seeds_attempted <= 0) return std::nullopt;
    return static_cast<double>(seeds_converted) / static_cast<double>(seeds_attempted);
}

std::vector<CostRow> cost_report(const CostLedger& ledger, std::span<const SearchRunStats> stats) {
    const auto attributions = ledger.attributions();
    std::set<std::pair<std::string, std::string>> seen;
    std::map<std::string, CostRow> rows;

    for (const auto& s : stats) {
        s.validate();
        const std::string where = s.language + "/" + s.run_id;
        if (!seen.insert({s.language, s.run_id}).second) throw InvariantError("run_id", "duplicate stats for " + where);
        auto lang = attributions.find(s.language);
        if (lang == attributions.end() || !lang->second.count(s.run_id))
            throw InvariantError("run_id", "ledger has no attribution for " + where);
        const Attribution& a = lang->second.at(s.run_id);
        if (a.candidates != s.candidates)
            throw InvariantError("candidates", "ledger and stats disagree for " + where);
        const double dollars = ledger.dollars_for(a.usage);
        if (std::fabs(dollars - s.dollars) > 1e-9 * std::max(1.0, std::fabs(dollars)))
            throw InvariantError("dollars", "ledger and stats disagree for " + where);

        CostRow& row = rows[s.language];
        row.language = s.language;
        row.run_ids.push_back(s.run_id);
        row.dollars += dollars;
        row.candidates += s.candidates;
        row.seeds_attempted += s.seeds_attempted;
        row.seeds_converted += s.seeds_converted;
    }
    for (const auto& [language, runs] : attributions)
        for (const auto& [run_id, a] : runs)
            if (!seen.count({language, run_id}))
                throw InvariantError("run_id", "ledger attribution " + language + "/" + run_id + " has no stats");

    std::vector<CostRow> out;
    for (auto& [l, r] : rows) out.push_back(std::move(r));
    return out;
}

Table cost_table(const std::vector<CostRow>& rows) {
    Table t;
    t.header = {"language", "run_ids", "dollars", "candidates", "dollars_per_candidate",
                "seeds_attempted", "seeds_converted", "conversion_rate"};
    if (rows.empty()) t.add({"no data", "", "0", "0", "no candidates", "0", "0", "no data"});
    for (const auto& r : rows) {
        std::string ids;
        for (const auto& id : r.run_ids) ids += (ids.empty() ? "" : ",") + id;
        const auto dpc = r.dollars_per_candidate();
        const auto rate = r.conversion_rate();
        t.add({r.language, ids, format_number(r.dollars), std::to_string(r.candidates),
               dpc ? format_number(*dpc) : "no candidates", std::to_string(r.seeds_attempted),
               std::to_string(r.seeds_converted), rate ? format_number(*rate) : "no data"});
    }
    return t;
}

}  // namespace xlprobe::analysis
