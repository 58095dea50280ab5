#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <set>

#include <json.hpp>

#include "generators.hpp"
#include "offline_fixture.hpp"
#include "xlprobe/analysis/accuracy.hpp"
#include "xlprobe/analysis/affinity.hpp"
#include "xlprobe/analysis/categories.hpp"
#include "xlprobe/analysis/cost.hpp"
#include "xlprobe/analysis/distance.hpp"
#include "xlprobe/analysis/expand.hpp"
#include "xlprobe/analysis/finetune.hpp"
#include "xlprobe/analysis/matrix.hpp"
#include "xlprobe/analysis/tables.hpp"
#include "xlprobe/core/errors.hpp"
#include "xlprobe/search/beam.hpp"

using namespace xlprobe;
using namespace xlprobe::analysis;
using xlprobe::testing::Gen;
using xlprobe::testing::OfflineFixture;

namespace {

DenseMatrix random_accuracy(Gen& g, std::size_t n) {
    DenseMatrix a(n, n);
    for (auto& v : a.data) v = g.real(0.05, 1.0);
    return a;
}

// Direct transcription of the affinity formula, one cell at a time.
double ras_oracle(const DenseMatrix& a, std::size_t x, std::size_t y, double c) {
    auto mean = [&](std::size_t row) {
        double s = 0;
        for (std::size_t j = 0; j < a.cols; ++j) s += a(row, j);
        return s / static_cast<double>(a.cols);
    };
    const double mx = mean(x), my = mean(y);
    return (a(x, y) - mx) / mx * std::exp(c * std::fabs(my - mx));
}

std::vector<CandidateRecord> offline_candidates(OfflineFixture& fx, int n, const std::string& language) {
    const auto seeds = fx.seed(harness::synthetic_questions(n), language);
    return search::run_search(fx.linguist, seeds, fx.config, fx.roster, {"run-a", language, nullptr}).candidates;
}

}  // namespace

TEST_SUITE("analysis") {
    TEST_CASE("property: affinity matches the cell-wise oracle") {
        Gen g(51);
        for (int iter = 0; iter < 100; ++iter) {
            const std::size_t n = static_cast<std::size_t>(g.integer(1, 8));
            const double c = -g.real(0.1, 3.0);
            const auto a = random_accuracy(g, n);
            std::vector<std::string> langs;
            for (std::size_t i = 0; i < n; ++i) langs.push_back("l" + std::to_string(i));
            const auto m = compute_affinity(langs, a, c);
            for (std::size_t x = 0; x < n; ++x)
                for (std::size_t y = 0; y < n; ++y) {
                    REQUIRE(m.ras[x][y]);
                    CHECK(*m.ras[x][y] == doctest::Approx(ras_oracle(a, x, y, c)).epsilon(1e-12));
                }
            // Row-centred values sum to zero within each row.
            for (std::size_t x = 0; x < n; ++x) {
                double s = 0;
                for (std::size_t y = 0; y < n; ++y) s += (a(x, y) - m.row_mean[x]) / m.row_mean[x];
                CHECK(std::fabs(s) < 1e-9);
            }
        }
    }

    TEST_CASE("serial and parallel kernels agree") {
        Gen g(52);
        for (std::size_t n : {1u, 7u, 64u, 200u}) {
            const auto a = random_accuracy(g, n);
            std::vector<double> rm_s, rm_p;
            const auto s = kernels::ras_serial(a, -1.0, rm_s);
            const auto p = kernels::ras_parallel(a, -1.0, rm_p);
            CHECK(rm_s == rm_p);
            CHECK(s.data == p.data);

            DenseMatrix v(n, 16);
            for (auto& x : v.data) x = g.real(-1, 1);
            const auto ds = kernels::cosine_distance_serial(v);
            const auto dp = kernels::cosine_distance_parallel(v);
            for (std::size_t i = 0; i < ds.data.size(); ++i) CHECK(std::fabs(ds.data[i] - dp.data[i]) <= 1e-12);
        }
    }

    TEST_CASE("zero row mean gives no affinity for that row") {
        DenseMatrix a(2, 2);
        a(1, 0) = 0.5;
        a(1, 1) = 0.7;
        const auto m = compute_affinity({"fr", "de"}, a, -1.0);
        CHECK_FALSE(m.ras[0][0]);
        CHECK_FALSE(m.ras[0][1]);
        CHECK(m.ras[1][0]);
        std::vector<double> rm;
        CHECK(std::isnan(kernels::ras_serial(a, -1.0, rm)(0, 1)));
        const auto t = m.to_table("r");
        CHECK(t.to_tsv().find("undefined") != std::string::npos);
    }

    TEST_CASE("affinity input validation") {
        DenseMatrix ok(2, 2, 0.5);
        CHECK_THROWS_AS(compute_affinity({"fr", "de"}, ok, 0.0), InvariantError);
        CHECK_THROWS_AS(compute_affinity({"fr"}, ok, -1.0), InvariantError);
        DenseMatrix bad(2, 2, 0.5);
        bad(0, 1) = 1.5;
        CHECK_THROWS_AS(compute_affinity({"fr", "de"}, bad, -1.0), InvariantError);
        CHECK_THROWS_AS(compute_affinity({"fr", "de"}, DenseMatrix(2, 3, 0.5), -1.0), InvariantError);
    }

    TEST_CASE("long-format accuracy tables read back into a matrix") {
        Table t;
        t.header = {"run_id", "eval_language", "seed_language", "accuracy"};
        t.add({"r", "fr", "fr", "0.5"});
        t.add({"r", "fr", "de", "0.25"});
        t.add({"r", "de", "fr", "1"});
        t.add({"r", "de", "de", "0.75"});
        const auto [langs, a] = accuracy_from_table(t);
        REQUIRE(langs.size() == 2);
        std::map<std::string, std::size_t> at;
        for (std::size_t i = 0; i < 2; ++i) at[langs[i]] = i;
        CHECK(a(at["fr"], at["de"]) == 0.25);
        CHECK(a(at["de"], at["fr"]) == 1.0);

        Table gap = t;
        gap.rows[1][3] = "NA";
        CHECK_THROWS_WITH_AS(accuracy_from_table(gap), doctest::Contains("missing cell"), InvariantError);
        Table junk = t;
        junk.rows[1][3] = "0.25x";
        CHECK_THROWS_AS(accuracy_from_table(junk), InvariantError);
    }

    TEST_CASE("property: cosine distance") {
        Gen g(53);
        for (int iter = 0; iter < 50; ++iter) {
            const int n = g.integer(1, 10), dim = g.integer(1, 12);
            std::vector<Embedding> e;
            for (int i = 0; i < n; ++i) {
                Embedding x{"e" + std::to_string(i), {}};
                for (int d = 0; d < dim; ++d) x.vector.push_back(g.real(-2, 2));
                x.vector[0] += x.vector[0] >= 0 ? 0.1 : -0.1;
                e.push_back(x);
            }
            const auto m = cosine_distance_matrix(e);
            auto scaled = e;
            for (auto& x : scaled)
                for (auto& v : x.vector) v *= 3.5;
            const auto ms = cosine_distance_matrix(scaled);
            for (int i = 0; i < n; ++i) {
                CHECK(m.distance(i, i) == 0.0);
                for (int j = 0; j < n; ++j) {
                    CHECK(m.distance(i, j) >= 0.0);
                    CHECK(m.distance(i, j) <= 2.0);
                    CHECK(m.distance(i, j) == m.distance(j, i));
                    CHECK(ms.distance(i, j) == doctest::Approx(m.distance(i, j)).epsilon(1e-12));
                }
            }
        }
        const std::vector<Embedding> opposite{{"a", {1, 0}}, {"b", {-2, 0}}, {"c", {0, 5}}};
        const auto m = cosine_distance_matrix(opposite);
        CHECK(m.distance(0, 1) == doctest::Approx(2.0));
        CHECK(m.distance(0, 2) == doctest::Approx(1.0));
    }

    TEST_CASE("distance input errors name the offender") {
        const std::vector<Embedding> zero{{"a", {1, 0}}, {"zed", {0, 0}}};
        CHECK_THROWS_WITH_AS(cosine_distance_matrix(zero), doctest::Contains("zed"), InvariantError);
        const std::vector<Embedding> dims{{"a", {1, 0}}, {"b", {1, 0, 0}}};
        CHECK_THROWS_AS(cosine_distance_matrix(dims), InvariantError);
        const std::vector<Embedding> dup{{"a", {1, 0}}, {"a", {0, 1}}};
        CHECK_THROWS_AS(cosine_distance_matrix(dup), InvariantError);
    }

    TEST_CASE("pooled accuracy matrix") {
        AccuracyTable t;
        t.rows = {{"m1", "fr", "de", 10, 9, 6}, {"m2", "fr", "de", 30, 30, 10}, {"m1", "de", "de", 5, 5, 5},
                  {"m1", "it", "de", 5, 5, 5}};
        const auto a = accuracy_matrix(t, {"fr", "de"});
        CHECK(a(0, 1) == doctest::Approx(16.0 / 40.0));
        CHECK(a(1, 1) == 1.0);
        CHECK(std::isnan(a(0, 0)));
        t.rows.push_back({"m1", "fr", "", 1, 1, 1});
        CHECK_THROWS_AS(accuracy_matrix(t, {"fr", "de"}), InvariantError);
    }

    TEST_CASE("offline evaluation counts every model on both sides") {
        OfflineFixture fx;
        const auto seeds = fx.seed(harness::synthetic_questions(6), "fr");
        std::vector<ModelSpec> targets(fx.roster.targets.begin(), fx.roster.targets.begin() + 2);
        const auto table = evaluate_pairs(fx.linguist, seeds, targets, fx.roster.judge, true);
        CHECK_NOTHROW(table.validate());
        REQUIRE(table.rows.size() == 2);
        for (const auto& r : table.rows) {
            CHECK(r.language == "fr");
            CHECK(r.origin_language == "fr");
            CHECK(r.n_questions == 6);
            CHECK(r.acc_en() == 1.0);
            CHECK(r.acc_target() == 1.0);
            CHECK(r.drop() == 0.0);
        }
        CHECK(table.excluded.empty());
        CHECK_THROWS_AS(evaluate_pairs(fx.linguist, seeds, std::vector<ModelSpec>{fx.roster.judge}, fx.roster.judge,
                                       false),
                        ConfigError);
        const AccuracyTable empty;
        CHECK(empty.to_table("r").to_tsv().find("no data") != std::string::npos);
    }

    TEST_CASE("category distribution") {
        using ling::Domain;
        const std::vector<std::pair<std::string, std::optional<Domain>>> labels{
            {"fr", Domain::arts_literature}, {"fr", std::nullopt},          {"fr", Domain::general_knowledge},
            {"de", Domain::arts_literature}, {"de", Domain::arts_literature}, {"fr", Domain::science_technology}};
        const auto d = aggregate_categories(labels);
        CHECK_NOTHROW(d.validate());
        REQUIRE(d.rows.size() == 2);
        const auto& fr = d.rows[1];
        CHECK(fr.language == "fr");
        CHECK(fr.total() == 4);
        CHECK(fr.flagged == 1);
        CHECK(d.overall.total() == 6);
        const auto p = d.overall.percentages();
        CHECK(p[4] == doctest::Approx(50.0));
        CHECK(p[1] == doctest::Approx(100.0 / 3));

        OfflineFixture fx;
        const auto cands = offline_candidates(fx, 5, "fr");
        REQUIRE_FALSE(cands.empty());
        const auto c = categorize_candidates(fx.linguist, cands, fx.roster.judge);
        CHECK(c.overall.total() == static_cast<std::int64_t>(cands.size()));
        CHECK(c.failures.empty());
    }

    TEST_CASE("cost report checks the ledger against the stats") {
        CostLedger ledger;
        ledger.set_price("m", {0.01, 0.02});
        ledger.attribute("fr", "r1", {{"m", {1000, 1000, 0, 0, 2}}}, 4);
        ledger.attribute("fr", "r2", {{"m", {1000, 0, 0, 0, 1}}}, 0);
        ledger.attribute("de", "r3", {{"m", {0, 0, 0, 0, 0}}}, 0);
        std::vector<SearchRunStats> stats{{"r1", "fr", 8, 2, 4, 3, 40, 1.0, 0.03},
                                          {"r2", "fr", 8, 0, 0, 4, 40, 1.0, 0.01},
                                          {"r3", "de", 8, 0, 0, 4, 40, 1.0, 0.0}};
        const auto rows = cost_report(ledger, stats);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].language == "de");
        CHECK_FALSE(rows[0].dollars_per_candidate());
        CHECK(rows[1].dollars == doctest::Approx(0.04));
        CHECK(*rows[1].dollars_per_candidate() == doctest::Approx(0.01));
        CHECK(*rows[1].conversion_rate() == doctest::Approx(2.0 / 16));
        CHECK(cost_table(rows).to_tsv().find("no candidates") != std::string::npos);
        CHECK(cost_table({}).to_tsv().find("no data") != std::string::npos);

        auto wrong = stats;
        wrong[0].candidates = 5;
        CHECK_THROWS_AS(cost_report(ledger, wrong), InvariantError);
        wrong = stats;
        wrong[1].dollars = 0.5;
        CHECK_THROWS_AS(cost_report(ledger, wrong), InvariantError);
        wrong = stats;
        wrong.pop_back();
        CHECK_THROWS_AS(cost_report(ledger, wrong), InvariantError);
        wrong = stats;
        wrong.push_back(stats[0]);
        CHECK_THROWS_AS(cost_report(ledger, wrong), InvariantError);
    }

    TEST_CASE("fine-tune export") {
        OfflineFixture fx;
        const auto cands = offline_candidates(fx, 4, "fr");
        REQUIRE_FALSE(cands.empty());
        const auto dpo = export_finetune(cands, FinetuneFormat::dpo, fx.templates, 9);
        REQUIRE(dpo.size() == cands.size());
        for (std::size_t i = 0; i < dpo.size(); ++i) {
            const auto& q = cands[i].pair.target;
            CHECK(dpo[i].completion == q.correct_answer());
            REQUIRE(dpo[i].rejected);
            CHECK(*dpo[i].rejected != q.correct_answer());
            CHECK(std::find(q.choices.begin(), q.choices.end(), *dpo[i].rejected) != q.choices.end());
            CHECK(dpo[i].prompt.find(q.text) != std::string::npos);
        }
        CHECK(finetune_jsonl(dpo, FinetuneFormat::dpo) ==
              finetune_jsonl(export_finetune(cands, FinetuneFormat::dpo, fx.templates, 9), FinetuneFormat::dpo));
        const auto sft = export_finetune(cands, FinetuneFormat::sft, fx.templates, 9);
        CHECK_FALSE(sft[0].rejected);
        const auto line = nlohmann::json::parse(finetune_jsonl(sft, FinetuneFormat::sft).substr(0, finetune_jsonl(sft, FinetuneFormat::sft).find('\n')));
        CHECK(line.contains("completion"));
        CHECK_FALSE(line.contains("rejected"));
        CHECK_THROWS_AS(parse_finetune_format("rlhf"), ConfigError);
    }

    TEST_CASE("expansion re-translates the base question and every fragment") {
        OfflineFixture fx;
        const auto cands = offline_candidates(fx, 2, "fr");
        REQUIRE_FALSE(cands.empty());
        std::vector<BilingualPair> pairs;
        for (const auto& c : cands) pairs.push_back(c.pair);
        const std::vector<std::string> langs{"de", "ja"};
        const auto r = expand_candidates(fx.linguist, pairs, langs, fx.roster.translator, fx.roster.fragment_translator);
        CHECK(r.skipped.empty());
        REQUIRE(r.pairs.size() == pairs.size() * 2);
        for (std::size_t i = 0; i < r.pairs.size(); ++i) {
            const auto& src = pairs[i / 2];
            const auto& out = r.pairs[i];
            CHECK(out.language() == langs[i % 2]);
            CHECK(out.english == src.english);
            CHECK(out.depth == src.depth);
            CHECK(out.target.text.rfind("[" + langs[i % 2] + "] " + base_question(src).text, 0) == 0);
            for (const auto& step : out.lineage)
                CHECK(out.target.text.find(step.target_fragment) != std::string::npos);
        }
        auto broken = pairs.front();
        broken.english.text = "something else";
        CHECK_THROWS_AS(base_question(broken), InvariantError);
    }

    TEST_CASE("tables") {
        CHECK(format_number(0.1) == "0.1");
        CHECK(format_number(-0.0) == "0");
        CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "NA");
        Gen g(54);
        for (int i = 0; i < 200; ++i) {
            const double v = g.real(-1e6, 1e6);
            CHECK(std::stod(format_number(v)) == v);
        }
        Table t;
        t.header = {"a", "b"};
        t.add({"x\ty", "line\nbreak"});
        CHECK_THROWS_AS(t.add({"only one"}), InvariantError);
        const auto path = std::filesystem::temp_directory_path() / "xlprobe_table.tsv";
        t.save(path);
        const auto back = load_tsv(path);
        CHECK(back.header == t.header);
        CHECK(back.rows == t.rows);
        CHECK(back.rows[0][0] == "x y");
        std::filesystem::remove(path);
    }
}
