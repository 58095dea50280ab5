#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "xlprobe/cli/app.hpp"
#include "xlprobe/core/errors.hpp"
#include "xlprobe/core/hash.hpp"
#include "xlprobe/core/records.hpp"

namespace fs = std::filesystem;
using namespace xlprobe;

namespace {

const std::string kConfig = std::string(XLPROBE_FIXTURES_DIR) + "/offline_config.json";

struct Workspace {
    fs::path root;
    std::ostringstream out, err;

    explicit Workspace(const std::string& name)
        : root(fs::temp_directory_path() / ("xlprobe_cli_" + name + "_" + std::to_string(::getpid()))) {
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Workspace() { fs::remove_all(root); }

    std::string path(const std::string& rel) const { return (root / rel).string(); }

    int run(std::vector<std::string> args) {
        out.str("");
        err.str("");
        return cli::run(args, out, err);
    }

    // synth + seed into `language`; returns the seeds file.
    std::string seeds(const std::string& language, int n) {
        REQUIRE(run({"synth", "--n", std::to_string(n), "--out", path("bank")}) == 0);
        REQUIRE(run({"seed", "--config", kConfig, "--source", path("bank/questions.jsonl"), "--language", language,
                     "--n", std::to_string(n), "--out", path("seed-" + language)}) == 0);
        return path("seed-" + language + "/seeds.jsonl");
    }
};

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("configuration errors exit with 2") {
        Workspace w("config");
        const auto seeds = w.seeds("fr", 4);
        CHECK(w.run({"search", "--config", kConfig, "--pairs", seeds, "--depth-initial", "6", "--depth-extended", "4",
                     "--out", w.path("bad")}) == cli::exit_config);
        CHECK(w.err.str().find("depth") != std::string::npos);

        CHECK(w.run({"seed", "--config", kConfig, "--source", w.path("bank/questions.jsonl"), "--language", "fr",
                     "--n", "5", "--out", w.path("toomany")}) == cli::exit_config);
        CHECK(w.run({"seed", "--config", kConfig, "--source", w.path("bank/questions.jsonl"), "--language", "xx",
                     "--n", "2", "--out", w.path("lang")}) == cli::exit_config);
        CHECK(w.run({"search", "--bogus"}) == cli::exit_config);
        CHECK(w.run({"--help"}) == cli::exit_ok);
    }

    TEST_CASE("a roster without a judge names the missing role") {
        Workspace w("roster");
        const auto seeds = w.seeds("fr", 2);
        auto cfg = nlohmann::json::parse(read_text_file(kConfig));
        auto& models = cfg["models"];
        for (auto it = models.begin(); it != models.end(); ++it)
            if ((*it)["name"] == "judge") {
                models.erase(it);
                break;
            }
        write_text_file(w.path("nojudge.json"), cfg.dump(2));
        CHECK(w.run({"search", "--config", w.path("nojudge.json"), "--pairs", seeds, "--out", w.path("s")}) ==
              cli::exit_config);
        CHECK(w.err.str().find("judge") != std::string::npos);
        const auto manifest = nlohmann::json::parse(read_text_file(w.path("s/manifest.json")));
        CHECK(manifest["exit_status"] == cli::exit_config);
    }

    TEST_CASE("exit codes by error type") {
        CHECK(cli::exit_code_for(ConfigError("x")) == cli::exit_config);
        CHECK(cli::exit_code_for(InvariantError("f", "x")) == cli::exit_invariant);
        CHECK(cli::exit_code_for(ParseError(3, "x")) == cli::exit_invariant);
        CHECK(cli::exit_code_for(std::runtime_error("x")) == cli::exit_other);
    }

    TEST_CASE("search outputs are byte-identical across reruns and carry a manifest") {
        Workspace w("rerun");
        const auto seeds = w.seeds("fr", 4);
        for (const char* dir : {"a", "b"})
            REQUIRE(w.run({"search", "--config", kConfig, "--pairs", seeds, "--out", w.path(dir)}) == 0);
        for (const char* file : {"candidates.jsonl", "stats.jsonl", "ledger.json", "config.snapshot.json"})
            CHECK(read_text_file(w.path(std::string("a/") + file)) == read_text_file(w.path(std::string("b/") + file)));
        CHECK(read_text_file(w.path("a/config.snapshot.json")) == read_text_file(kConfig));

        const auto manifest = nlohmann::json::parse(read_text_file(w.path("a/manifest.json")));
        CHECK(manifest["command"] == "search");
        CHECK(manifest["exit_status"] == 0);
        CHECK(manifest["config"]["sha256"] == sha256_hex(read_text_file(kConfig)));
        const auto stats = load_records<SearchRunStats>(w.path("a/stats.jsonl"));
        REQUIRE(stats.size() == 1);
        CHECK(manifest["run_id"] == stats[0].run_id);
        CHECK(stats[0].candidates > 0);

        // A single run reports cleanly; two runs need --merge.
        REQUIRE(w.run({"search", "--config", kConfig, "--pairs", seeds, "--run-id", "other", "--out", w.path("c")}) ==
                0);
        CHECK(w.run({"report", "--stats", w.path("a/stats.jsonl"), "--ledger", w.path("a/ledger.json"), "--out",
                     w.path("r1")}) == 0);
        CHECK(w.run({"report", "--stats", w.path("a/stats.jsonl"), "--stats", w.path("c/stats.jsonl"), "--ledger",
                     w.path("a/ledger.json"), "--ledger", w.path("c/ledger.json"), "--out", w.path("r2")}) ==
              cli::exit_config);
        CHECK(w.err.str().find("--merge") != std::string::npos);
        CHECK(w.run({"report", "--stats", w.path("a/stats.jsonl"), "--stats", w.path("c/stats.jsonl"), "--ledger",
                     w.path("a/ledger.json"), "--ledger", w.path("c/ledger.json"), "--merge", "--out",
                     w.path("r3")}) == 0);

        for (const char* dir : {"e1", "e2"})
            REQUIRE(w.run({"export", "--candidates", w.path("a/candidates.jsonl"), "--format", "dpo", "--seed", "5",
                           "--out", w.path(dir)}) == 0);
        CHECK(read_text_file(w.path("e1/finetune_dpo.jsonl")) == read_text_file(w.path("e2/finetune_dpo.jsonl")));
    }

    TEST_CASE("empty inputs produce explicit no-data rows") {
        Workspace w("empty");
        write_text_file(w.path("none.jsonl"), "");
        REQUIRE(w.run({"evaluate", "--config", kConfig, "--candidates", w.path("none.jsonl"), "--out",
                       w.path("ev")}) == 0);
        CHECK(read_text_file(w.path("ev/accuracy.tsv")).find("no data") != std::string::npos);
    }

    TEST_CASE("a missing answering template fails before any search work") {
        Workspace w("template");
        const auto seeds = w.seeds("ja", 2);
        CHECK(w.run({"search", "--config", kConfig, "--pairs", seeds, "--out", w.path("s")}) == cli::exit_config);
        CHECK(w.err.str().find("templates generate") != std::string::npos);
    }

    TEST_CASE("corrupt inputs exit with 4") {
        Workspace w("corrupt");
        write_text_file(w.path("bad.jsonl"), "{\"kind\": \"candidate\"\n");
        CHECK(w.run({"export", "--candidates", w.path("bad.jsonl"), "--out", w.path("x")}) == cli::exit_invariant);
    }
}
