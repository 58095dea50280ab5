#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "generators.hpp"
#include "offline_fixture.hpp"
#include "xlprobe/core/errors.hpp"
#include "xlprobe/search/baselines.hpp"
#include "xlprobe/search/beam.hpp"
#include "xlprobe/search/score.hpp"
#include "xlprobe/search/seeding.hpp"

using namespace xlprobe;
using namespace xlprobe::search;
using xlprobe::testing::Gen;
using xlprobe::testing::OfflineFixture;

namespace {

ScoredChild child(const std::string& seed, const std::string& id, double v, int parent_rank = 0) {
    ScoredChild c;
    c.pair.seed_id = seed;
    c.pair.pair_id = id;
    c.simulation.pair_id = id;
    c.simulation.score = v;
    c.parent_rank = parent_rank;
    return c;
}

std::vector<std::string> ids(const std::vector<ScoredChild>& v) {
    std::vector<std::string> out;
    for (const auto& c : v) out.push_back(c.pair.pair_id);
    return out;
}

}  // namespace

TEST_SUITE("search") {
    TEST_CASE("score and conversion rate") {
        CHECK(score(1.0, 0.2, 2.0) == doctest::Approx(0.8));
        CHECK(score(0.5, 0.0, 3.0) == doctest::Approx(0.125));
        CHECK_THROWS_AS(score(1.1, 0.0, 2.0), std::domain_error);
        CHECK_THROWS_AS(score(1.0, -0.1, 2.0), std::domain_error);
        CHECK_THROWS_AS(score(1.0, 0.0, 1.0), std::domain_error);
        SearchRunStats st;
        CHECK_FALSE(conversion_rate(st));
        st.seeds_attempted = 8;
        st.seeds_converted = 2;
        CHECK(*conversion_rate(st) == doctest::Approx(0.25));
    }

    TEST_CASE("make_result averages correctness bits") {
        const auto r = make_result("p", {"a", "b", "c", "d"}, {true, true, true, false}, {false, true, false, false},
                                   2.0);
        CHECK(r.english_mean == doctest::Approx(0.75));
        CHECK(r.target_mean == doctest::Approx(0.25));
        CHECK(r.score == doctest::Approx(0.75 * 0.75 - 0.25));
        CHECK_THROWS(make_result("p", {"a"}, {true, false}, {true}, 2.0));
    }

    TEST_CASE("redundancy cap closes a seed within one level") {
        SearchConfig cfg;
        std::map<std::string, int> per_seed;
        std::vector<ScoredChild> children;
        for (int i = 0; i < 5; ++i) children.push_back(child("s", "p" + std::to_string(i), 0.9));
        children.push_back(child("t", "t0", 0.5));
        const auto d = beam_step(children, cfg, per_seed);
        CHECK(ids(d.admitted) == std::vector<std::string>{"p0", "p1", "p2"});
        CHECK(d.discarded == std::vector<std::string>{"p3", "p4"});
        CHECK(d.closed_seeds == std::vector<std::string>{"s"});
        CHECK(ids(d.frontier) == std::vector<std::string>{"t0"});
        CHECK(per_seed["s"] == 3);
        CHECK(d.level_max == doctest::Approx(0.9));
        CHECK(d.extend_depth);

        // Later levels drop every child of a closed seed.
        const auto next = beam_step({child("s", "q0", 0.2), child("t", "t1", 0.1)}, cfg, per_seed);
        CHECK(next.discarded == std::vector<std::string>{"q0"});
        CHECK(ids(next.frontier) == std::vector<std::string>{"t1"});
        CHECK_FALSE(next.extend_depth);
    }

    TEST_CASE("ranking ties break on parent rank then pair id") {
        SearchConfig cfg;
        cfg.beam_width = 3;
        std::map<std::string, int> per_seed;
        const auto d = beam_step({child("a", "z", 0.4, 1), child("b", "y", 0.4, 0), child("c", "x", 0.4, 1),
                                  child("d", "w", 0.1, 0), child("e", "v", 0.5, 7)},
                                 cfg, per_seed);
        CHECK(ids(d.frontier) == std::vector<std::string>{"v", "y", "x"});
        CHECK(d.admitted.empty());
    }

    TEST_CASE("admission check rejections do not count towards the cap") {
        SearchConfig cfg;
        std::map<std::string, int> per_seed;
        const auto d = beam_step({child("s", "a", 0.95), child("s", "b", 0.9)}, cfg, per_seed,
                                 [](const ScoredChild& c) { return c.pair.pair_id != "a"; });
        CHECK(d.rejected == std::vector<std::string>{"a"});
        CHECK(ids(d.admitted) == std::vector<std::string>{"b"});
        CHECK(per_seed["s"] == 1);
    }

    TEST_CASE("property: beam step invariants") {
        Gen g(31);
        for (int iter = 0; iter < 300; ++iter) {
            SearchConfig cfg;
            cfg.beam_width = g.integer(1, 12);
            cfg.redundancy_cap = g.integer(1, 3);
            std::map<std::string, int> per_seed;
            for (int s = 0; s < 4; ++s)
                if (g.coin()) per_seed["s" + std::to_string(s)] = g.integer(0, cfg.redundancy_cap);
            const auto before = per_seed;
            std::vector<ScoredChild> children;
            const int n = g.integer(0, 30);
            for (int i = 0; i < n; ++i)
                children.push_back(child("s" + std::to_string(g.integer(0, 3)), "p" + std::to_string(i),
                                         std::round(g.real(-1, 1) * 10) / 10, g.integer(0, 5)));
            const auto d = beam_step(children, cfg, per_seed);

            CHECK(d.frontier.size() <= static_cast<std::size_t>(cfg.beam_width));
            CHECK(d.frontier.size() + d.admitted.size() + d.discarded.size() <= children.size());
            std::map<std::string, int> admitted;
            for (const auto& c : d.admitted) {
                CHECK(c.simulation.score >= cfg.inclusion_threshold);
                ++admitted[c.pair.seed_id];
            }
            for (const auto& [seed, k] : admitted) {
                const int had = before.count(seed) ? before.at(seed) : 0;
                CHECK(had + k <= cfg.redundancy_cap);
                CHECK(per_seed[seed] == had + k);
            }
            for (const auto& c : d.frontier) {
                CHECK(c.simulation.score < cfg.inclusion_threshold);
                CHECK(per_seed[c.pair.seed_id] < cfg.redundancy_cap);
            }
            for (std::size_t i = 1; i < d.frontier.size(); ++i)
                CHECK(d.frontier[i - 1].simulation.score >= d.frontier[i].simulation.score);
            double best = children.empty() ? 0.0 : -2.0;
            for (const auto& c : children) best = std::max(best, c.simulation.score);
            CHECK(d.level_max == best);
            CHECK(d.extend_depth == (!children.empty() && best >= cfg.potential_threshold));
        }
    }

    TEST_CASE("expansion emits one child per incorrect option in order") {
        OfflineFixture fx;
        const auto seeds = fx.seed(harness::synthetic_questions(2, 4), "fr");
        FixedClock clock(0);
        const auto e = expand_frontier(fx.linguist, seeds, fx.roster, fx.config, clock);
        REQUIRE(e.children.size() == 6);
        CHECK(e.failures.empty());
        for (std::size_t i = 0; i < e.children.size(); ++i) {
            const auto& c = e.children[i];
            CHECK(c.depth == 1);
            CHECK(e.parent_rank[i] == static_cast<int>(i / 3));
            CHECK(c.parent_id == seeds[i / 3].pair_id);
            CHECK_NOTHROW(c.validate());
            CHECK(c.english.text.rfind(seeds[i / 3].english.text, 0) == 0);
            CHECK(c.target.text.find("[fr] ") != std::string::npos);
            if (i % 3) CHECK(c.lineage[0].distractor_index > e.children[i - 1].lineage[0].distractor_index);
        }
    }

    TEST_CASE("empty seed set gives zeroed statistics") {
        OfflineFixture fx;
        const auto out = run_search(fx.linguist, {}, fx.config, fx.roster, {"empty", "fr", nullptr});
        CHECK(out.candidates.empty());
        CHECK(out.stats.seeds_attempted == 0);
        CHECK(out.stats.seeds_converted == 0);
        CHECK(out.stats.total_pairs_scored == 0);
        CHECK(fx.harness.invocations("sim-0") == 0);
    }

    TEST_CASE("search refuses a language without an answering template") {
        OfflineFixture fx;
        const auto seeds = fx.seed(harness::synthetic_questions(1), "ja");
        CHECK_THROWS_AS(run_search(fx.linguist, seeds, fx.config, fx.roster, {"r", "ja", nullptr}),
                        ling::MissingTemplate);
        CHECK_THROWS_AS(run_search(fx.linguist, seeds, fx.config, fx.roster, {"r", "fr", nullptr}), InvariantError);
    }

    TEST_CASE("property: search invariants over random scenarios") {
        Gen g(41);
        for (int iter = 0; iter < 10; ++iter) {
            harness::ScenarioOptions opt;
            opt.failing_simulators = g.integer(0, 5);
            opt.trap_all_distractors = g.coin();
            SearchConfig cfg;
            cfg.batch_size = g.integer(1, 4);
            cfg.beam_width = g.integer(1, 12);
            cfg.redundancy_cap = g.integer(1, 3);
            CAPTURE(iter);
            CAPTURE(opt.failing_simulators);
            OfflineFixture fx(opt, cfg);
            const int n = g.integer(1, 5);
            const auto seeds = fx.seed(harness::synthetic_questions(n, g.integer(3, 5)), "fr");
            const auto out = run_search(fx.linguist, seeds, cfg, fx.roster, {"prop", "fr", nullptr});

            std::map<std::string, int> per_seed;
            std::set<std::string> pair_ids;
            for (const auto& c : out.candidates) {
                CHECK_NOTHROW(c.validate_against(cfg));
                CHECK(c.score >= cfg.inclusion_threshold);
                CHECK(c.pair.depth >= 1);
                CHECK(c.pair.depth <= cfg.depth_extended);
                CHECK(c.admitted_at_depth == c.pair.depth);
                CHECK(c.run_id == "prop");
                CHECK(pair_ids.insert(c.pair.pair_id).second);
                ++per_seed[c.pair.seed_id];
            }
            for (const auto& [seed, k] : per_seed) CHECK(k <= cfg.redundancy_cap);
            CHECK(out.stats.seeds_attempted == n);
            CHECK(out.stats.seeds_converted == static_cast<std::int64_t>(per_seed.size()));
            CHECK(out.stats.candidates == static_cast<std::int64_t>(out.candidates.size()));
            CHECK(out.stats.levels_explored <= cfg.depth_extended);

            // Only the trapped simulators miss, so V is failing/5 on every trapped pair.
            if (opt.failing_simulators < 4) CHECK(out.candidates.empty());
            else CHECK(out.stats.seeds_converted == n);
            const int sims = opt.simulators;
            CHECK(fx.harness.invocations("sim-0") == 2 * out.stats.total_pairs_scored);
            CHECK(fx.harness.invocations("sim-" + std::to_string(sims - 1)) == 2 * out.stats.total_pairs_scored);
        }
    }

    TEST_CASE("baselines against the scripted oracle") {
        SUBCASE("untouched seeds do not convert") {
            OfflineFixture fx;
            const auto seeds = fx.seed(harness::synthetic_questions(8), "fr");
            const auto np = baseline_np(fx.linguist, seeds, fx.config, fx.roster, {"np", "fr", nullptr});
            CHECK(np.stats.seeds_attempted == 8);
            CHECK(np.converted.empty());
            CHECK(np.stats.total_pairs_scored == 8);
        }
        SUBCASE("a broken target language converts every seed without perturbation") {
            harness::ScenarioOptions opt;
            opt.translation_breaks = true;
            OfflineFixture fx(opt);
            const auto seeds = fx.seed(harness::synthetic_questions(4), "fr");
            const auto np = baseline_np(fx.linguist, seeds, fx.config, fx.roster, {"np", "fr", nullptr});
            CHECK(np.stats.seeds_converted == 4);
            for (const auto& c : np.converted) CHECK(c.score == doctest::Approx(1.0));
        }
        SUBCASE("direct rewrites plant the trap on every fourth seed") {
            OfflineFixture fx;
            const auto seeds = fx.seed(harness::synthetic_questions(8), "fr");
            const auto dp = baseline_dp(fx.linguist, seeds, fx.config, fx.roster, {"dp", "fr", nullptr});
            CHECK(dp.stats.seeds_attempted == 8);
            CHECK(dp.stats.seeds_converted == 2);
        }
    }
}

TEST_SUITE("seeding") {
    TEST_CASE("equal shares per source dataset") {
        const auto bank = harness::synthetic_questions(50);
        const auto a = sample_equally(bank, 20, 7);
        REQUIRE(a.size() == 20);
        std::map<SourceDataset, int> counts;
        std::set<std::string> seen;
        for (const auto& q : a) {
            ++counts[q.source_dataset];
            CHECK(seen.insert(q.id).second);
        }
        CHECK(counts.size() == 5);
        for (const auto& [ds, k] : counts) CHECK(k == 4);
        CHECK(sample_equally(bank, 20, 7) == a);
        CHECK(sample_equally(bank, 20, 8) != a);
        CHECK(sample_equally(bank, 50, 1).size() == 50);
        CHECK_THROWS_AS(sample_equally(bank, 51, 1), ConfigError);
    }

    TEST_CASE("exhausted datasets drop out of the rotation") {
        auto bank = harness::synthetic_questions(10);
        const SourceDataset big = bank.front().source_dataset;
        for (int i = 0; i < 4; ++i) {
            auto q = bank.front();
            q.id = "extra" + std::to_string(i);
            bank.push_back(q);
        }
        std::map<SourceDataset, int> counts;
        for (const auto& q : sample_equally(bank, 14, 3)) ++counts[q.source_dataset];
        CHECK(counts[big] == 6);
        for (const auto& [ds, k] : counts)
            if (ds != big) CHECK(k == 2);
    }

    TEST_CASE("seeding keeps verified translations and drops the rest") {
        OfflineFixture ok;
        const auto questions = harness::synthetic_questions(6);
        ok.harness.add_questions(questions);
        const auto kept = seed_pairs(ok.linguist, questions, "de", ok.roster);
        CHECK(kept.dropped.empty());
        REQUIRE(kept.pairs.size() == 6);
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(kept.pairs[i].seed_id == questions[i].id);
            CHECK(kept.pairs[i].depth == 0);
            CHECK(kept.pairs[i].language() == "de");
        }

        harness::ScenarioOptions opt;
        opt.judge_rejects = true;
        OfflineFixture strict(opt);
        strict.harness.add_questions(questions);
        const auto none = seed_pairs(strict.linguist, questions, "de", strict.roster);
        CHECK(none.pairs.empty());
        CHECK(none.dropped.size() == 6);
    }

    TEST_CASE("roster names the first missing role") {
        std::vector<ModelSpec> models = harness::OfflineHarness().roster();
        std::erase_if(models, [](const ModelSpec& m) { return m.name == "judge"; });
        try {
            Roster::for_search(models);
            FAIL("expected a config error");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("judge") != std::string::npos);
        }
    }
}
