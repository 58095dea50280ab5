#include "xlprobe/search/baselines.hpp"

#include <set>

#include "xlprobe/core/cost_ledger.hpp"
#include "xlprobe/core/hash.hpp"
#include "xlprobe/gateway/errors.hpp"

namespace xlprobe::search {
namespace {

void check_seeds(const ling::Linguist& linguist, std::span<const BilingualPair> seeds,
                 const SearchOptions& options) {
    if (options.run_id.empty()) throw ConfigError("baseline needs a run id");
    for (const auto& s : seeds) {
        if (s.depth != 0) throw InvariantError("depth", "seed " + s.pair_id + " is not a depth-0 pair");
        if (s.language() != options.language)
            throw InvariantError("target.language", "seed " + s.pair_id + " is not in the run language");
    }
    if (!seeds.empty()) require_answer_template(linguist, options.language);
}

// Scores `pairs` once; pairs at or above the inclusion threshold convert their seed.
BaselineOutcome score_once(const ling::Linguist& linguist, std::span<const BilingualPair> pairs,
                           std::int64_t attempted, const SearchConfig& config, const Roster& roster,
                           const SearchOptions& options, const UsageByModel& usage_before, std::int64_t started,
                           const Clock& clock, std::vector<SearchFailure> failures) {
    BaselineOutcome out;
    out.failures = std::move(failures);
    auto sims = simulate_many(linguist, pairs, roster.simulators, roster.judge, config.score_exponent);
    std::set<std::string> converted;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (!sims[i].result) {
            out.failures.push_back({pairs[i].seed_id, pairs[i].pair_id, 0, "simulate", sims[i].failure});
            continue;
        }
        ++out.stats.total_pairs_scored;
        if (sims[i].result->score < config.inclusion_threshold) continue;
        CandidateRecord rec;
        rec.pair = pairs[i];
        rec.simulation = *sims[i].result;
        rec.score = rec.simulation.score;
        rec.run_id = options.run_id;
        rec.admitted_at_depth = 0;
        rec.validate();
        converted.insert(rec.pair.seed_id);
        out.converted.push_back(std::move(rec));
    }

    auto& ledger = linguist.gateway().ledger();
    const UsageByModel delta = usage_delta(ledger.usage(), usage_before);
    out.stats.run_id = options.run_id;
    out.stats.language = options.language;
    out.stats.seeds_attempted = attempted;
    out.stats.seeds_converted = static_cast<std::int64_t>(converted.size());
    out.stats.candidates = static_cast<std::int64_t>(out.converted.size());
    ledger.attribute(options.language, options.run_id, delta, out.stats.candidates);
    out.stats.dollars = ledger.dollars_for(delta);
    out.stats.wall_time_s = static_cast<double>(clock.now_ms() - started) / 1000.0;
    out.stats.validate();
    return out;
}

}  // namespace

BaselineOutcome baseline_np(const ling::Linguist& linguist, std::span<const BilingualPair> seeds,
                            const SearchConfig& config, const Roster& roster, const SearchOptions& options) {
    config.validate();
    check_seeds(linguist, seeds, options);
    FixedClock zero_clock(0);
    const Clock& clock = options.clock ? *options.clock : zero_clock;
    const auto before = linguist.gateway().ledger().usage();
    const auto started = clock.now_ms();
    return score_once(linguist, seeds, static_cast<std::int64_t>(seeds.size()), config, roster, options, before,
                      started, clock, {});
}

BaselineOutcome baseline_dp(const ling::Linguist& linguist, std::span<const BilingualPair> seeds,
                            const SearchConfig& config, const Roster& roster, const SearchOptions& options) {
    config.validate();
    check_seeds(linguist, seeds, options);
    FixedClock zero_clock(0);
    const Clock& clock = options.clock ? *options.clock : zero_clock;
    const auto before = linguist.gateway().ledger().usage();
    const auto started = clock.now_ms();

    std::vector<std::optional<BilingualPair>> rewritten(seeds.size());
    std::vector<std::optional<SearchFailure>> failed(seeds.size());
    linguist.gateway().parallel_for(seeds.size(), [&](std::size_t i) {
        const BilingualPair& seed = seeds[i];
        auto fail = [&](std::string stage, std::string reason) {
            failed[i] = SearchFailure{seed.seed_id, seed.pair_id, 0, std::move(stage), std::move(reason)};
        };
        try {
            LocalizedQuestion english = seed.english;
            english.text = linguist.direct_perturbation(roster.proxy, seed.english);
            LocalizedQuestion target = linguist.translate_question(roster.translator, english, seed.language());
            if (!linguist.semantic_check(roster.judge, seed.english, english) ||
                !linguist.semantic_check(roster.judge, english, target)) {
                fail("verify", "direct rewrite failed the semantic check");
                return;
            }
            BilingualPair p = make_seed_pair(seed.seed_id, std::move(english), std::move(target));
            // Distinct from the unperturbed seed pair, which shares seed and language.
            p.pair_id = content_id({"direct_perturbation", seed.pair_id, p.english.text});
            p.validate();
            rewritten[i] = std::move(p);
        } catch (const gateway::BackendError& e) {
            fail("perturb", e.what());
        } catch (const ling::LinguisticsError& e) {
            fail("perturb", e.what());
        }
    });

    std::vector<BilingualPair> pairs;
    std::vector<SearchFailure> failures;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (rewritten[i]) pairs.push_back(std::move(*rewritten[i]));
        if (failed[i]) failures.push_back(std::move(*failed[i]));
    }
    return score_once(linguist, pairs, static_cast<std::int64_t>(seeds.size()), config, roster, options, before,
                      started, clock, std::move(failures));
}

}  // namespace xlprobe::search
