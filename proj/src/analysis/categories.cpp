#include "xlprobe/analysis/categories.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "xlprobe/gateway/errors.hpp"

namespace xlprobe::analysis {
namespace {

std::size_t domain_index(ling::Domain d) {
    const auto& all = ling::all_domains();
    return static_cast<std::size_t>(std::find(all.begin(), all.end(), d) - all.begin());
}

void tally(CategoryRow& row, const std::optional<ling::Domain>& d) {
    if (d) {
        ++row.counts[domain_index(*d)];
    } else {
        ++row.counts[domain_index(ling::Domain::general_knowledge)];
        ++row.flagged;
    }
}

}  // namespace

std::int64_t CategoryRow::total() const { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }

std::array<double, 6> CategoryRow::percentages() const {
    std::array<double, 6> p{};
    const auto n = total();
    if (n == 0) return p;
    for (std::size_t i = 0; i < 6; ++i) p[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(n);
    return p;
}

void CategoryDistribution::validate() const {
    auto check = [](const CategoryRow& r) {
        if (r.total() == 0) return;
        const auto p = r.percentages();
        const double sum = std::accumulate(p.begin(), p.end(), 0.0);
        if (std::fabs(sum - 100.0) > 0.1) throw InvariantError("percentages", "row " + r.language + " does not sum to 100");
        if (r.flagged > r.counts[domain_index(ling::Domain::general_knowledge)])
            throw InvariantError("flagged", "exceeds the General Knowledge count");
    };
    for (const auto& r : rows) check(r);
    check(overall);
}

Table CategoryDistribution::to_table(const std::string& run_id) const {
    Table t;
    t.header = {"run_id", "language", "n"};
    for (auto d : ling::all_domains()) t.header.emplace_back(ling::to_string(d));
    t.header.emplace_back("flagged_unparseable");
    auto emit = [&](const CategoryRow& r) {
        std::vector<std::string> row{run_id, r.language, std::to_string(r.total())};
        const auto p = r.percentages();
        for (std::size_t i = 0; i < 6; ++i) row.push_back(r.total() ? format_number(p[i]) : "no data");
        row.push_back(std::to_string(r.flagged));
        t.add(std::move(row));
    };
    for (const auto& r : rows) emit(r);
    emit(overall);
    return t;
}

CategoryDistribution aggregate_categories(
    std::span<const std::pair<std::string, std::optional<ling::Domain>>> labels) {
    std::map<std::string, CategoryRow> by_language;
    CategoryDistribution out;
    out.overall.language = "overall";
    for (const auto& [language, domain] : labels) {
        auto& row = by_language[language];
        row.language = language;
        tally(row, domain);
        tally(out.overall, domain);
    }
    for (auto& [l, r] : by_language) out.rows.push_back(std::move(r));
    out.validate();
    return out;
}

CategoryDistribution categorize_candidates(const ling::Linguist& linguist, std::span<const CandidateRecord> candidates,
                                           const ModelSpec& judge) {
    std::vector<std::optional<ling::Domain>> verdicts(candidates.size());
    std::vector<std::string> failure(candidates.size());
    linguist.gateway().parallel_for(candidates.size(), [&](std::size_t i) {
        try {
            verdicts[i] = linguist.categorize(judge, candidates[i].pair.english);
        } catch (const gateway::BackendError& e) {
            failure[i] = e.what();
        }
    });
    std::vector<std::pair<std::string, std::optional<ling::Domain>>> labels;
    std::vector<std::string> failures;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!failure[i].empty()) {
            failures.push_back(candidates[i].pair.pair_id + "\t" + failure[i]);
            continue;
        }
        labels.emplace_back(candidates[i].pair.language(), verdicts[i]);
    }
    auto out = aggregate_categories(labels);
    out.failures = std::move(failures);
    return out;
}

}  // namespace xlprobe::analysis
