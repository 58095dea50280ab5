#include "xlprobe/search/beam.hpp"

#include <algorithm>
#include <chrono>

#include "xlprobe/core/cost_ledger.hpp"
#include "xlprobe/gateway/errors.hpp"

namespace xlprobe::search {
namespace {

struct ChildTask {
    std::size_t parent = 0;
    int distractor = 0;
};

std::vector<int> selected_distractors(const BilingualPair& pair, const SearchConfig& config) {
    auto idx = pair.english.incorrect_indices();
    if (config.branching_per_pair && static_cast<std::size_t>(*config.branching_per_pair) < idx.size())
        idx.resize(static_cast<std::size_t>(*config.branching_per_pair));
    return idx;
}

}  // namespace

Expansion expand_frontier(const ling::Linguist& linguist, std::span<const BilingualPair> frontier,
                          const Roster& roster, const SearchConfig& config, const Clock& clock) {
    std::vector<ChildTask> tasks;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
        if (frontier[i].depth >= config.max_depth())
            throw InvariantError("depth", "frontier pair " + frontier[i].pair_id + " is already at the maximum depth");
        for (int d : selected_distractors(frontier[i], config)) tasks.push_back({i, d});
    }

    std::vector<std::optional<BilingualPair>> made(tasks.size());
    std::vector<std::optional<SearchFailure>> failed(tasks.size());
    std::vector<std::string> proxy_errors(tasks.size());

    linguist.gateway().parallel_for(tasks.size(), [&](std::size_t t) {
        const auto& parent = frontier[tasks[t].parent];
        const int d = tasks[t].distractor;
        auto fail = [&](std::string stage, std::string reason) {
            failed[t] = SearchFailure{parent.seed_id, parent.pair_id, parent.depth + 1, std::move(stage),
                                      "distractor " + std::to_string(d) + ": " + reason};
        };
        std::string english_fragment;
        try {
            english_fragment = linguist.generate_perturbation(roster.proxy, parent.english, d);
        } catch (const gateway::BackendError& e) {
            proxy_errors[t] = e.what();
            return;
        } catch (const ling::PerturbationError& e) {
            fail("perturb", e.what());
            return;
        }
        std::string target_fragment;
        try {
            target_fragment = linguist.translate_fragment(roster.fragment_translator, english_fragment,
                                                          parent.target.language);
        } catch (const gateway::BackendError& e) {
            fail("translate", e.what());
            return;
        } catch (const ling::TranslationError& e) {
            fail("translate", e.what());
            return;
        }
        PerturbationStep step{d, english_fragment, target_fragment, roster.proxy.name, clock.now_ms()};
        try {
            BilingualPair child = extend_pair(parent, std::move(step), ling::insert(parent.english, english_fragment),
                                              ling::insert(parent.target, target_fragment));
            child.validate();
            made[t] = std::move(child);
        } catch (const InvariantError& e) {
            fail("perturb", e.what());
        }
    });

    for (const auto& e : proxy_errors)
        if (!e.empty()) throw ProxyFailure("proxy model failed: " + e);

    Expansion out;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (made[t]) {
            out.children.push_back(std::move(*made[t]));
            out.parent_rank.push_back(static_cast<int>(tasks[t].parent));
        } else if (failed[t]) {
            out.failures.push_back(std::move(*failed[t]));
        }
    }
    return out;
}

BeamDecision beam_step(std::vector<ScoredChild> children, const SearchConfig& config,
                       std::map<std::string, int>& admitted_per_seed, const AdmissionCheck& admit) {
    std::stable_sort(children.begin(), children.end(), [](const ScoredChild& a, const ScoredChild& b) {
        if (a.simulation.score != b.simulation.score) return a.simulation.score > b.simulation.score;
        if (a.parent_rank != b.parent_rank) return a.parent_rank < b.parent_rank;
        return a.pair.pair_id < b.pair.pair_id;
    });

    BeamDecision out;
    if (!children.empty()) out.level_max = children.front().simulation.score;
    out.extend_depth = !children.empty() && out.level_max >= config.potential_threshold;

    std::set<std::string> closed;
    for (const auto& [seed, n] : admitted_per_seed)
        if (n >= config.redundancy_cap) closed.insert(seed);

    std::vector<ScoredChild> survivors;
    for (auto& c : children) {
        const std::string& seed = c.pair.seed_id;
        if (closed.count(seed)) {
            out.discarded.push_back(c.pair.pair_id);
            continue;
        }
        if (c.simulation.score >= config.inclusion_threshold) {
            if (admit && !admit(c)) {
                out.rejected.push_back(c.pair.pair_id);
                continue;
            }
            if (++admitted_per_seed[seed] >= config.redundancy_cap) {
                closed.insert(seed);
                out.closed_seeds.push_back(seed);
            }
            out.admitted.push_back(std::move(c));
            continue;
        }
        survivors.push_back(std::move(c));
    }

    for (auto& c : survivors) {
        if (closed.count(c.pair.seed_id)) {
            out.discarded.push_back(c.pair.pair_id);
        } else if (out.frontier.size() < static_cast<std::size_t>(config.beam_width)) {
            out.frontier.push_back(std::move(c));
        }
    }
    return out;
}

SearchOutcome run_search(const ling::Linguist& linguist, std::span<const BilingualPair> seeds,
                         const SearchConfig& config, const Roster& roster, const SearchOptions& options) {
    config.validate();
    FixedClock zero_clock(0);
    const Clock& clock = options.clock ? *options.clock : zero_clock;
    if (options.run_id.empty()) throw ConfigError("run_search needs a run id");
    for (const auto& s : seeds) {
        if (s.depth != 0) throw InvariantError("depth", "seed " + s.pair_id + " is not a depth-0 pair");
        if (s.language() != options.language)
            throw InvariantError("target.language", "seed " + s.pair_id + " is in '" + s.language() +
                                                         "', run language is '" + options.language + "'");
    }
    if (!seeds.empty()) require_answer_template(linguist, options.language);

    auto& ledger = linguist.gateway().ledger();
    const UsageByModel usage_before = ledger.usage();
    const std::int64_t started = clock.now_ms();

    SearchOutcome out;
    out.stats.run_id = options.run_id;
    out.stats.language = options.language;
    out.stats.seeds_attempted = static_cast<std::int64_t>(seeds.size());

    std::map<std::string, const BilingualPair*> seed_by_id;
    for (const auto& s : seeds) seed_by_id[s.seed_id] = &s;
    std::map<std::string, int> admitted_per_seed;

    const auto verify = [&](const ScoredChild& c) {
        const BilingualPair& seed = *seed_by_id.at(c.pair.seed_id);
        try {
            return linguist.semantic_check(roster.judge, seed.english, c.pair.english) &&
                   linguist.semantic_check(roster.judge, c.pair.english, c.pair.target);
        } catch (const Error& e) {
            out.failures.push_back({c.pair.seed_id, c.pair.pair_id, c.pair.depth, "verify", e.what()});
            return false;
        }
    };

    const auto batch = static_cast<std::size_t>(config.batch_size);
    for (std::size_t g = 0, begin = 0; begin < seeds.size(); ++g, begin += batch) {
        const auto group = seeds.subspan(begin, std::min(batch, seeds.size() - begin));
        std::vector<BilingualPair> frontier(group.begin(), group.end());
        int budget = config.depth_initial;
        int depth = 0;
        while (!frontier.empty() && depth < budget) {
            LevelTrace level;
            level.group = g;
            level.depth = depth + 1;
            level.frontier_in = frontier.size();

            Expansion ex;
            try {
                ex = expand_frontier(linguist, frontier, roster, config, clock);
            } catch (const ProxyFailure& e) {
                for (const auto& s : group) out.failures.push_back({s.seed_id, "", depth + 1, "proxy", e.what()});
                break;
            }
            ++depth;
            out.stats.levels_explored = std::max<std::int64_t>(out.stats.levels_explored, depth);
            out.failures.insert(out.failures.end(), ex.failures.begin(), ex.failures.end());
            level.children = ex.children.size();

            auto sims = simulate_many(linguist, ex.children, roster.simulators, roster.judge, config.score_exponent);
            std::vector<ScoredChild> scored;
            for (std::size_t i = 0; i < ex.children.size(); ++i) {
                if (!sims[i].result) {
                    out.failures.push_back(
                        {ex.children[i].seed_id, ex.children[i].pair_id, depth, "simulate", sims[i].failure});
                    continue;
                }
                scored.push_back({std::move(ex.children[i]), std::move(*sims[i].result), ex.parent_rank[i]});
            }
            level.scored = scored.size();
            out.stats.total_pairs_scored += static_cast<std::int64_t>(scored.size());

            BeamDecision decision = beam_step(std::move(scored), config, admitted_per_seed, verify);
            for (auto& c : decision.admitted) {
                CandidateRecord rec;
                rec.score = c.simulation.score;
                rec.admitted_at_depth = c.pair.depth;
                rec.run_id = options.run_id;
                rec.pair = std::move(c.pair);
                rec.simulation = std::move(c.simulation);
                rec.validate_against(config);
                out.candidates.push_back(std::move(rec));
            }
            if (decision.extend_depth) budget = std::max(budget, config.depth_extended);
            level.admitted = decision.admitted.size();
            level.level_max = decision.level_max;
            level.budget_after = budget;
            out.trace.push_back(level);

            frontier.clear();
            for (auto& c : decision.frontier) frontier.push_back(std::move(c.pair));
        }
    }

    out.stats.candidates = static_cast<std::int64_t>(out.candidates.size());
    std::set<std::string> converted;
    for (const auto& c : out.candidates) converted.insert(c.pair.seed_id);
    out.stats.seeds_converted = static_cast<std::int64_t>(converted.size());

    const UsageByModel delta = usage_delta(ledger.usage(), usage_before);
    ledger.attribute(options.language, options.run_id, delta, out.stats.candidates);
    out.stats.dollars = ledger.dollars_for(delta);
    out.stats.wall_time_s = static_cast<double>(clock.now_ms() - started) / 1000.0;
    out.stats.validate();
    return out;
}

}  // namespace xlprobe::search
