#include "xlprobe/cli/app.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "xlprobe/analysis/accuracy.hpp"
#include "xlprobe/analysis/affinity.hpp"
#include "xlprobe/analysis/categories.hpp"
#include "xlprobe/analysis/cost.hpp"
#include "xlprobe/analysis/distance.hpp"
#include "xlprobe/analysis/expand.hpp"
#include "xlprobe/analysis/finetune.hpp"
#include "xlprobe/analysis/tables.hpp"
#include "xlprobe/core/clock.hpp"
#include "xlprobe/core/config.hpp"
#include "xlprobe/core/errors.hpp"
#include "xlprobe/core/hash.hpp"
#include "xlprobe/core/languages.hpp"
#include "xlprobe/core/records.hpp"
#include "xlprobe/gateway/errors.hpp"
#include "xlprobe/gateway/gateway.hpp"
#include "xlprobe/gateway/transcript.hpp"
#include "xlprobe/harness/offline.hpp"
#include "xlprobe/linguistics/linguist.hpp"
#include "xlprobe/linguistics/templates.hpp"
#include "xlprobe/search/baselines.hpp"
#include "xlprobe/search/beam.hpp"
#include "xlprobe/search/seeding.hpp"
#include "xlprobe/search/simulate.hpp"

namespace xlprobe::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using analysis::Table;

struct Common {
    std::string config_path;
    std::string mode = "offline";
    std::string transcript;
    std::string transcript_mode = "record";
    std::string run_id;
    std::string out;
    std::string templates_dir;
};

// Command-line overrides for SearchConfig fields.
struct SearchOverrides {
    std::optional<int> batch_size, beam_width, depth_initial, depth_extended, redundancy_cap;
    std::optional<double> score_exponent, inclusion_threshold, potential_threshold, english_tolerance;
    std::optional<int> branching_per_pair;
    std::optional<double> perturbation_temperature, deterministic_temperature;
    std::optional<int> max_output_tokens;
    std::optional<double> affinity_constant;
    std::optional<int> perturbation_retries;

    void apply(SearchConfig& c) const {
        auto set = [](auto& field, const auto& v) {
            if (v) field = *v;
        };
        set(c.batch_size, batch_size);
        set(c.beam_width, beam_width);
        set(c.depth_initial, depth_initial);
        set(c.depth_extended, depth_extended);
        set(c.redundancy_cap, redundancy_cap);
        set(c.score_exponent, score_exponent);
        set(c.inclusion_threshold, inclusion_threshold);
        set(c.potential_threshold, potential_threshold);
        set(c.english_tolerance, english_tolerance);
        if (branching_per_pair) c.branching_per_pair = *branching_per_pair;
        set(c.perturbation_temperature, perturbation_temperature);
        set(c.deterministic_temperature, deterministic_temperature);
        set(c.max_output_tokens, max_output_tokens);
        set(c.affinity_constant, affinity_constant);
        set(c.perturbation_retries, perturbation_retries);
    }
};

void add_search_flags(CLI::App* cmd, SearchOverrides& o) {
    cmd->add_option("--batch-size", o.batch_size, "Seeds per shared beam pool (W)");
    cmd->add_option("--beam-width", o.beam_width, "Frontier size (w)");
    cmd->add_option("--depth-initial", o.depth_initial, "Initial depth budget (d1)");
    cmd->add_option("--depth-extended", o.depth_extended, "Extended depth budget (d2)");
    cmd->add_option("--redundancy-cap", o.redundancy_cap, "Candidates per seed before it is closed (r)");
    cmd->add_option("--score-exponent", o.score_exponent, "English accuracy exponent (gamma)");
    cmd->add_option("--inclusion-threshold", o.inclusion_threshold, "Admission score");
    cmd->add_option("--potential-threshold", o.potential_threshold, "Score that extends the depth budget");
    cmd->add_option("--english-tolerance", o.english_tolerance, "Reported English tolerance");
    cmd->add_option("--branching-per-pair", o.branching_per_pair, "Children per pair (default: one per distractor)");
    cmd->add_option("--perturbation-temperature", o.perturbation_temperature);
    cmd->add_option("--deterministic-temperature", o.deterministic_temperature);
    cmd->add_option("--max-output-tokens", o.max_output_tokens);
    cmd->add_option("--affinity-constant", o.affinity_constant, "RAS constant c");
    cmd->add_option("--perturbation-retries", o.perturbation_retries);
}

void add_common_flags(CLI::App* cmd, Common& c, bool needs_config) {
    auto* config = cmd->add_option("--config", c.config_path, "Run config (JSON)");
    if (needs_config) config->required()->check(CLI::ExistingFile);
    cmd->add_option("--mode", c.mode, "offline or live")->check(CLI::IsMember({"offline", "live"}));
    cmd->add_option("--transcript", c.transcript, "Transcript file to record to or replay from");
    cmd->add_option("--transcript-mode", c.transcript_mode)->check(CLI::IsMember({"record", "replay"}));
    cmd->add_option("--run-id", c.run_id, "Run id stamped on every output");
    cmd->add_option("--out", c.out, "Output directory")->required();
    cmd->add_option("--templates", c.templates_dir, "Directory of template overrides (<id>/<lang>.txt)")
        ->check(CLI::ExistingDirectory);
}

struct Session {
    Session() = default;
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    std::string command;
    Common common;
    std::optional<RunConfig> config;
    std::string config_text;
    ling::TemplateRegistry templates;
    std::unique_ptr<gateway::Gateway> gw;
    std::unique_ptr<ling::Linguist> linguist;
    std::optional<harness::OfflineHarness> harness;
    std::unique_ptr<Clock> clock;
    std::int64_t started_ms = 0;
    std::string run_id;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    bool replay = false;

    fs::path out_dir() const { return fs::path(common.out); }

    void input(const std::string& path) {
        inputs.push_back(path);
    }
    std::string input_bytes(const std::string& path) {
        input(path);
        return read_text_file(path);
    }
    void emit(const std::string& name, std::string_view content) {
        write_text_file(out_dir() / name, content);
        outputs.push_back(name);
    }
    void emit(const std::string& name, const Table& t) { emit(name, t.to_tsv()); }

    const RunConfig& cfg() const {
        if (!config) throw ConfigError(command + " needs --config");
        return *config;
    }
};

// The linguist keeps a reference to s.templates, so the session is filled in place.
void open_session(Session& s, std::string command, const Common& common, const SearchOverrides* overrides) {
    s.command = std::move(command);
    s.common = common;
    s.replay = !common.transcript.empty() && common.transcript_mode == "replay";
    s.templates = ling::TemplateRegistry::builtin();
    if (!common.templates_dir.empty()) s.templates.load_dir(common.templates_dir);

    if (!common.config_path.empty()) {
        s.config_text = read_text_file(common.config_path);
        RunConfig cfg = parse_run_config(s.config_text);
        if (overrides) overrides->apply(cfg.search);
        cfg.validate();
        s.config = std::move(cfg);
    }

    const bool live = common.mode == "live";
    if (live && !s.replay) s.clock = std::make_unique<SystemClock>();
    else s.clock = std::make_unique<FixedClock>(0);
    s.started_ms = s.clock->now_ms();

    if (s.config) {
        s.gw = std::make_unique<gateway::Gateway>(s.config->gateway,
                                                  live ? gateway::Mode::live : gateway::Mode::offline);
        s.harness.emplace(harness::ScenarioOptions::from_json(s.config->offline));
        s.harness->install(*s.gw);
        if (s.replay) s.gw->use_replay(gateway::load_transcript(common.transcript));
        else if (!common.transcript.empty()) s.gw->record_transcript(true);
        s.linguist = std::make_unique<ling::Linguist>(*s.gw, s.templates,
                                                      ling::GenerationSettings::from(s.config->search));
    } else if (!common.transcript.empty()) {
        throw ConfigError("--transcript needs --config");
    }
    fs::create_directories(s.out_dir());
}

// Deterministic run id derived from the command and its inputs.
std::string derive_run_id(const std::string& command, const std::vector<std::string>& parts) {
    std::vector<std::string> all{command};
    all.insert(all.end(), parts.begin(), parts.end());
    return command + "-" + content_id(all).substr(0, 12);
}

// The single run id shared by `ids`, or nullopt when they differ or are empty.
std::optional<std::string> shared_run_id(const std::set<std::string>& ids) {
    if (ids.size() == 1) return *ids.begin();
    return std::nullopt;
}

void write_manifest(Session& s, int exit_status, const std::string& error) {
    ordered_json m;
    m["run_id"] = s.run_id;
    m["command"] = s.command;
    m["mode"] = s.common.mode;
    if (!s.common.transcript.empty())
        m["transcript"] = {{"path", s.common.transcript}, {"mode", s.common.transcript_mode}};
    if (s.config) {
        m["config"] = {{"path", s.common.config_path},
                       {"snapshot", "config.snapshot.json"},
                       {"sha256", sha256_hex(s.config_text)}};
        json models = s.config->models;
        json search = s.config->search;
        m["models"] = models;
        m["search"] = search;
    }
    m["inputs"] = s.inputs;
    m["outputs"] = s.outputs;
    m["started_ms"] = s.started_ms;
    m["finished_ms"] = s.clock ? s.clock->now_ms() : s.started_ms;
    m["exit_status"] = exit_status;
    if (!error.empty()) m["error"] = error;
    write_text_file(s.out_dir() / "manifest.json", m.dump(2) + "\n");
}

void finish(Session& s) {
    if (s.gw && !s.common.transcript.empty() && !s.replay) {
        s.gw->transcript().save(s.common.transcript);
        s.outputs.push_back(s.common.transcript);
    }
    if (s.gw && s.common.mode == "offline" && s.gw->network_calls() != 0)
        throw InvariantError("network_calls", "offline run made " + std::to_string(s.gw->network_calls()) +
                                                  " network calls");
    if (s.config) s.emit("config.snapshot.json", s.config_text);
    write_manifest(s, exit_ok, "");
}

template <typename T>
std::vector<T> load_all(Session& s, const std::vector<std::string>& paths) {
    std::vector<T> out;
    for (const auto& p : paths) {
        s.input(p);
        auto part = load_records<T>(p);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

std::string fingerprint(const std::vector<std::string>& paths) {
    std::vector<std::string> parts;
    for (const auto& p : paths) parts.push_back(content_id({read_text_file(p)}));
    return content_id(parts);
}

// Lets the scripted offline backends answer questions built from `pairs`.
void teach(Session& s, std::span<const BilingualPair> pairs) {
    if (!s.harness) return;
    for (const auto& p : pairs) s.harness->add_question(analysis::base_question(p));
}

Table failures_table(const std::string& run_id, const std::vector<search::SearchFailure>& failures) {
    Table t;
    t.header = {"run_id", "seed_id", "pair_id", "depth", "stage", "reason"};
    for (const auto& f : failures)
        t.add({run_id, f.seed_id, f.pair_id, std::to_string(f.depth), f.stage, f.reason});
    return t;
}

std::string stats_summary(const SearchRunStats& st) {
    std::string rate = st.seeds_attempted > 0
                           ? analysis::format_number(static_cast<double>(st.seeds_converted) /
                                                     static_cast<double>(st.seeds_attempted))
                           : "no data";
    return "language " + st.language + ": attempted " + std::to_string(st.seeds_attempted) + ", converted " +
           std::to_string(st.seeds_converted) + ", candidates " + std::to_string(st.candidates) +
           ", conversion rate " + rate + ", levels " + std::to_string(st.levels_explored) + "\n";
}

// ---- subcommands ----

struct SeedArgs {
    std::string source;
    std::string language;
    std::size_t n = 0;
    std::uint64_t sample_seed = 0;
};

void cmd_seed(Session& s, const SeedArgs& a, std::ostream& out) {
    const std::string bytes = s.input_bytes(a.source);
    const auto roster = search::Roster::from(s.cfg().models, std::array{Role::translator, Role::judge});
    require_target_language(a.language);
    auto questions = load_records<QuestionRecord>(a.source);
    auto sampled = search::sample_equally(questions, a.n, a.sample_seed);
    if (s.run_id.empty())
        s.run_id = derive_run_id("seed", {s.config_text, bytes, a.language, std::to_string(a.n),
                                          std::to_string(a.sample_seed)});
    if (s.harness) s.harness->add_questions(sampled);
    auto outcome = search::seed_pairs(*s.linguist, sampled, a.language, roster);

    std::string lines;
    for (const auto& p : outcome.pairs) lines += to_record_line(p) + "\n";
    s.emit("seeds.jsonl", lines);
    Table drops;
    drops.header = {"run_id", "question_id", "reason"};
    for (const auto& d : outcome.dropped) drops.add({s.run_id, d.question_id, d.reason});
    s.emit("seed_drops.tsv", drops);
    out << "seeded " << outcome.pairs.size() << " of " << sampled.size() << " questions into " << a.language
        << " (dropped " << outcome.dropped.size() << ")\n";
}

struct SearchArgs {
    std::string pairs;
    std::string baseline;
    std::string language;
};

void cmd_search(Session& s, const SearchArgs& a, std::ostream& out) {
    const std::string bytes = s.input_bytes(a.pairs);
    const RunConfig& cfg = s.cfg();
    const auto roster = search::Roster::for_search(cfg.models);
    auto seeds = load_records<BilingualPair>(a.pairs);

    std::string language = a.language;
    for (const auto& p : seeds) {
        if (language.empty()) language = p.language();
        if (p.language() != language)
            throw ConfigError("seed " + p.pair_id + " is in '" + p.language() + "', expected '" + language + "'");
    }
    if (language.empty()) throw ConfigError("no seeds to infer the language from; pass --language");
    require_target_language(language);
    if (s.run_id.empty())
        s.run_id = derive_run_id(a.baseline.empty() ? "search" : a.baseline,
                                 {s.config_text, bytes, language, json(cfg.search).dump()});
    teach(s, seeds);

    search::SearchOptions options{s.run_id, language, s.clock.get()};
    std::vector<CandidateRecord> candidates;
    SearchRunStats stats;
    std::vector<search::SearchFailure> failures;
    std::optional<std::vector<search::LevelTrace>> trace;
    if (a.baseline == "np" || a.baseline == "dp") {
        auto r = a.baseline == "np" ? search::baseline_np(*s.linguist, seeds, cfg.search, roster, options)
                                    : search::baseline_dp(*s.linguist, seeds, cfg.search, roster, options);
        candidates = std::move(r.converted);
        stats = r.stats;
        failures = std::move(r.failures);
    } else {
        auto r = search::run_search(*s.linguist, seeds, cfg.search, roster, options);
        candidates = std::move(r.candidates);
        stats = r.stats;
        failures = std::move(r.failures);
        trace = std::move(r.trace);
    }

    std::string lines;
    for (const auto& c : candidates) lines += to_record_line(c) + "\n";
    s.emit("candidates.jsonl", lines);
    s.emit("stats.jsonl", to_record_line(stats) + "\n");
    s.emit("ledger.json", to_record_line(s.gw->ledger()) + "\n");
    s.emit("failures.tsv", failures_table(s.run_id, failures));
    if (trace) {
        Table t;
        t.header = {"run_id", "group", "depth", "frontier_in", "children", "scored", "admitted", "level_max",
                    "budget_after"};
        for (const auto& l : *trace)
            t.add({s.run_id, std::to_string(l.group), std::to_string(l.depth), std::to_string(l.frontier_in),
                   std::to_string(l.children), std::to_string(l.scored), std::to_string(l.admitted),
                   analysis::format_number(l.level_max), std::to_string(l.budget_after)});
        s.emit("trace.tsv", t);
    }
    out << stats_summary(stats);
}

struct PairInputs {
    std::vector<std::string> candidates;
    std::vector<std::string> pairs;
};

// Pairs from candidate and pair files, plus the run ids found on candidates.
std::vector<BilingualPair> load_pairs(Session& s, const PairInputs& in, std::set<std::string>& run_ids) {
    std::vector<BilingualPair> pairs;
    for (auto& c : load_all<CandidateRecord>(s, in.candidates)) {
        run_ids.insert(c.run_id);
        pairs.push_back(std::move(c.pair));
    }
    for (auto& p : load_all<BilingualPair>(s, in.pairs)) pairs.push_back(std::move(p));
    return pairs;
}

void default_run_id(Session& s, const std::set<std::string>& run_ids, const std::string& command,
                    const std::vector<std::string>& extra) {
    if (!s.run_id.empty()) return;
    if (auto shared = shared_run_id(run_ids); shared && s.inputs.size() == 1) {
        s.run_id = *shared;
        return;
    }
    std::vector<std::string> parts{s.config_text, fingerprint(s.inputs)};
    parts.insert(parts.end(), extra.begin(), extra.end());
    s.run_id = derive_run_id(command, parts);
}

void cmd_evaluate(Session& s, const PairInputs& in, bool by_origin, std::ostream& out) {
    const auto roster = search::Roster::from(s.cfg().models, std::array{Role::judge, Role::target});
    std::set<std::string> run_ids;
    auto pairs = load_pairs(s, in, run_ids);
    default_run_id(s, run_ids, "evaluate", {by_origin ? "by-origin" : ""});
    teach(s, pairs);
    auto table = analysis::evaluate_pairs(*s.linguist, pairs, roster.targets, roster.judge, by_origin);
    s.emit("accuracy.tsv", table.to_table(s.run_id));
    Table excluded;
    excluded.header = {"run_id", "model", "pair_id", "reason"};
    for (const auto& e : table.excluded) {
        std::vector<std::string> f{s.run_id};
        std::size_t start = 0;
        for (int i = 0; i < 2; ++i) {
            const auto tab = e.find('\t', start);
            f.push_back(e.substr(start, tab - start));
            start = tab == std::string::npos ? e.size() : tab + 1;
        }
        f.push_back(e.substr(start));
        excluded.add(std::move(f));
    }
    s.emit("accuracy_excluded.tsv", excluded);

    if (by_origin && !table.rows.empty()) {
        std::set<std::string> present;
        for (const auto& r : table.rows) {
            present.insert(r.language);
            present.insert(r.origin_language);
        }
        std::vector<std::string> languages;
        for (const auto& info : target_languages())
            if (present.count(std::string(info.code))) languages.emplace_back(info.code);
        const auto m = analysis::accuracy_matrix(table, languages);
        Table t;
        t.header = {"run_id", "eval_language", "seed_language", "accuracy"};
        for (std::size_t x = 0; x < languages.size(); ++x)
            for (std::size_t y = 0; y < languages.size(); ++y)
                t.add({s.run_id, languages[x], languages[y], analysis::format_number(m(x, y))});
        s.emit("accuracy_matrix.tsv", t);
    }
    out << "evaluated " << pairs.size() << " pairs on " << roster.targets.size() << " models\n";
}

void cmd_expand(Session& s, const PairInputs& in, const std::vector<std::string>& languages, std::ostream& out) {
    const auto roster = search::Roster::from(s.cfg().models, std::array{Role::translator});
    std::set<std::string> run_ids;
    auto pairs = load_pairs(s, in, run_ids);
    std::string joined;
    for (const auto& l : languages) joined += l + ",";
    default_run_id(s, run_ids, "expand", {joined});
    teach(s, pairs);
    auto result =
        analysis::expand_candidates(*s.linguist, pairs, languages, roster.translator, roster.fragment_translator);
    std::string lines;
    for (const auto& p : result.pairs) lines += to_record_line(p) + "\n";
    s.emit("expanded.jsonl", lines);
    Table skips;
    skips.header = {"run_id", "pair_id", "language", "reason"};
    for (const auto& k : result.skipped) skips.add({s.run_id, k.pair_id, k.language, k.reason});
    s.emit("expansion_skips.tsv", skips);
    out << "expanded " << pairs.size() << " pairs into " << languages.size() << " languages: "
        << result.pairs.size() << " pairs, " << result.skipped.size() << " skipped\n";
}

void cmd_affinity(Session& s, const std::string& accuracy_path, std::optional<double> c, std::ostream& out) {
    s.input(accuracy_path);
    const Table t = analysis::load_tsv(accuracy_path);
    std::set<std::string> run_ids;
    for (std::size_t i = 0; i < t.header.size(); ++i)
        if (t.header[i] == "run_id")
            for (const auto& r : t.rows) run_ids.insert(r[i]);
    const double constant = c ? *c : (s.config ? s.config->search.affinity_constant : -1.0);
    default_run_id(s, run_ids, "affinity", {analysis::format_number(constant)});
    auto [languages, matrix] = analysis::accuracy_from_table(t);
    auto aff = analysis::compute_affinity(languages, matrix, constant);
    s.emit("affinity.tsv", aff.to_table(s.run_id));
    out << "affinity over " << aff.languages.size() << " languages with c = " << analysis::format_number(constant)
        << "\n";
}

void cmd_distance(Session& s, const std::string& embeddings_path, std::ostream& out) {
    s.input(embeddings_path);
    default_run_id(s, {}, "distance", {});
    const auto embeddings = analysis::load_embeddings(embeddings_path);
    const auto d = analysis::cosine_distance_matrix(embeddings);
    s.emit("distance.tsv", d.to_table(s.run_id));
    out << "distance matrix over " << d.ids.size() << " items\n";
}

void cmd_categorize(Session& s, const std::vector<std::string>& candidate_paths, std::ostream& out) {
    const auto roster = search::Roster::from(s.cfg().models, std::array{Role::judge});
    auto candidates = load_all<CandidateRecord>(s, candidate_paths);
    std::set<std::string> run_ids;
    std::vector<BilingualPair> pairs;
    for (const auto& c : candidates) {
        run_ids.insert(c.run_id);
        pairs.push_back(c.pair);
    }
    default_run_id(s, run_ids, "categorize", {});
    teach(s, pairs);
    auto dist = analysis::categorize_candidates(*s.linguist, candidates, roster.judge);
    s.emit("categories.tsv", dist.to_table(s.run_id));
    Table failures;
    failures.header = {"run_id", "pair_id", "reason"};
    for (const auto& f : dist.failures) {
        const auto tab = f.find('\t');
        failures.add({s.run_id, f.substr(0, tab), tab == std::string::npos ? "" : f.substr(tab + 1)});
    }
    s.emit("categorize_failures.tsv", failures);
    out << "categorized " << dist.overall.total() << " candidates (" << dist.overall.flagged << " flagged)\n";
}

struct ReportArgs {
    std::vector<std::string> stats;
    std::vector<std::string> ledgers;
    bool merge = false;
};

void cmd_report(Session& s, const ReportArgs& a, std::ostream& out) {
    auto stats = load_all<SearchRunStats>(s, a.stats);
    CostLedger ledger;
    for (const auto& p : a.ledgers) {
        for (const auto& l : load_all<CostLedger>(s, {p})) ledger.merge(l);
    }
    std::set<std::string> run_ids;
    for (const auto& st : stats) run_ids.insert(st.run_id);
    for (const auto& [lang, runs] : ledger.attributions())
        for (const auto& [run, attr] : runs) run_ids.insert(run);
    if (run_ids.size() > 1 && !a.merge) {
        std::string list;
        for (const auto& r : run_ids) list += (list.empty() ? "" : ", ") + r;
        throw ConfigError("inputs mix run ids (" + list + "); pass --merge to combine them");
    }
    if (s.run_id.empty())
        s.run_id = run_ids.size() == 1 ? *run_ids.begin() : derive_run_id("report", {fingerprint(s.inputs)});
    const auto rows = analysis::cost_report(ledger, stats);
    s.emit("cost.tsv", analysis::cost_table(rows));
    out << "cost report over " << rows.size() << " languages\n";
}

struct ExportArgs {
    std::vector<std::string> candidates;
    std::string format = "sft";
    std::uint64_t seed = 0;
};

void cmd_export(Session& s, const ExportArgs& a, std::ostream& out) {
    const auto format = analysis::parse_finetune_format(a.format);
    auto candidates = load_all<CandidateRecord>(s, a.candidates);
    std::set<std::string> run_ids;
    for (const auto& c : candidates) run_ids.insert(c.run_id);
    default_run_id(s, run_ids, "export", {a.format, std::to_string(a.seed)});
    const auto records = analysis::export_finetune(candidates, format, s.templates, a.seed);
    s.emit("finetune_" + a.format + ".jsonl", analysis::finetune_jsonl(records, format));
    out << "exported " << records.size() << " " << a.format << " records\n";
}

void cmd_templates_generate(Session& s, const std::string& language, std::ostream& out) {
    const auto roster = search::Roster::from(s.cfg().models, std::array{Role::translator});
    require_target_language(language);
    if (s.run_id.empty()) s.run_id = derive_run_id("templates", {s.config_text, language});
    const auto t = s.linguist->generate_answer_template(roster.translator, language);
    ling::save_template(s.out_dir(), t);
    s.outputs.push_back(std::string(ling::to_string(t.id)) + "/" + t.language + ".txt");
    out << "wrote " << s.outputs.back() << "\n";
}

void cmd_synth(Session& s, int n, int choices, std::ostream& out) {
    if (s.run_id.empty()) s.run_id = derive_run_id("synth", {std::to_string(n), std::to_string(choices)});
    std::string lines;
    for (const auto& q : harness::synthetic_questions(n, choices)) lines += to_record_line(q) + "\n";
    s.emit("questions.jsonl", lines);
    out << "wrote " << n << " synthetic questions\n";
}

void cmd_templates_list(const Common& common, std::ostream& out) {
    auto registry = ling::TemplateRegistry::builtin();
    if (!common.templates_dir.empty()) registry.load_dir(common.templates_dir);
    for (const auto& [id, language] : registry.keys()) out << ling::to_string(id) << "\t" << language << "\n";
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ling::TemplateError*>(&e)) return exit_config;
    if (dynamic_cast<const gateway::BackendError*>(&e) || dynamic_cast<const search::ProxyFailure*>(&e))
        return exit_backend;
    if (dynamic_cast<const InvariantError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
        dynamic_cast<const ling::LinguisticsError*>(&e) || dynamic_cast<const json::exception*>(&e))
        return exit_invariant;
    return exit_other;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cross-lingual weakness probing"};
    app.name("xlprobe");
    app.require_subcommand(1);

    Common common;
    SearchOverrides overrides;

    SeedArgs seed_args;
    auto* seed = app.add_subcommand("seed", "Sample English questions and build bilingual seed pairs");
    add_common_flags(seed, common, true);
    seed->add_option("--source", seed_args.source, "QuestionRecord JSONL")->required()->check(CLI::ExistingFile);
    seed->add_option("--language", seed_args.language, "Target language code")->required();
    seed->add_option("--n", seed_args.n, "Number of seeds")->required();
    seed->add_option("--sample-seed", seed_args.sample_seed, "Sampling RNG seed");

    SearchArgs search_args;
    auto* srch = app.add_subcommand("search", "Beam search for weakness candidates");
    add_common_flags(srch, common, true);
    add_search_flags(srch, overrides);
    srch->add_option("--pairs", search_args.pairs, "Seed pair JSONL")->required()->check(CLI::ExistingFile);
    srch->add_option("--baseline", search_args.baseline, "Run a baseline instead: np or dp")
        ->check(CLI::IsMember({"np", "dp"}));
    srch->add_option("--language", search_args.language, "Run language (default: the seeds')");

    PairInputs eval_in;
    bool by_origin = false;
    auto* eval = app.add_subcommand("evaluate", "Accuracy of target models on pairs, English vs target");
    add_common_flags(eval, common, true);
    eval->add_option("--candidates", eval_in.candidates, "Candidate JSONL files")->check(CLI::ExistingFile);
    eval->add_option("--pairs", eval_in.pairs, "Bilingual pair JSONL files")->check(CLI::ExistingFile);
    eval->add_flag("--by-origin", by_origin, "Group by the language each pair was discovered in");

    PairInputs expand_in;
    std::vector<std::string> languages;
    auto* expand = app.add_subcommand("expand", "Re-translate candidates into other languages");
    add_common_flags(expand, common, true);
    expand->add_option("--candidates", expand_in.candidates, "Candidate JSONL files")->check(CLI::ExistingFile);
    expand->add_option("--pairs", expand_in.pairs, "Bilingual pair JSONL files")->check(CLI::ExistingFile);
    expand->add_option("--languages", languages, "Target language codes")->required()->delimiter(',');

    std::string accuracy_path;
    std::optional<double> affinity_c;
    auto* affinity = app.add_subcommand("affinity", "Relative affinity scores from an accuracy matrix");
    add_common_flags(affinity, common, false);
    affinity->add_option("--accuracy", accuracy_path, "Long-format accuracy table (eval_language, seed_language)")
        ->required()
        ->check(CLI::ExistingFile);
    affinity->add_option("-c,--constant", affinity_c, "Affinity constant (negative)");

    std::string embeddings_path;
    auto* distance = app.add_subcommand("distance", "Pairwise cosine distances between embeddings");
    add_common_flags(distance, common, false);
    distance->add_option("--embeddings", embeddings_path, "JSONL with id and vector")
        ->required()
        ->check(CLI::ExistingFile);

    std::vector<std::string> categorize_in;
    auto* categorize = app.add_subcommand("categorize", "Domain distribution of candidates");
    add_common_flags(categorize, common, true);
    categorize->add_option("--candidates", categorize_in, "Candidate JSONL files")
        ->required()
        ->check(CLI::ExistingFile);

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "Cost and conversion table from run stats and ledgers");
    add_common_flags(report, common, false);
    report->add_option("--stats", report_args.stats, "stats.jsonl files")->check(CLI::ExistingFile);
    report->add_option("--ledger", report_args.ledgers, "ledger.json files")->check(CLI::ExistingFile);
    report->add_flag("--merge", report_args.merge, "Allow inputs from several runs");

    ExportArgs export_args;
    auto* exp = app.add_subcommand("export", "Fine-tuning records from candidates");
    add_common_flags(exp, common, false);
    exp->add_option("--candidates", export_args.candidates, "Candidate JSONL files")
        ->required()
        ->check(CLI::ExistingFile);
    exp->add_option("--format", export_args.format, "sft or dpo")->check(CLI::IsMember({"sft", "dpo"}));
    exp->add_option("--seed", export_args.seed, "RNG seed for rejected choices");

    int synth_n = 20;
    int synth_choices = 4;
    auto* synth = app.add_subcommand("synth", "Write the synthetic question bank the offline backends know");
    add_common_flags(synth, common, false);
    synth->add_option("--n", synth_n, "Number of questions")->check(CLI::PositiveNumber);
    synth->add_option("--choices", synth_choices, "Options per question")->check(CLI::Range(2, 8));

    auto* templates = app.add_subcommand("templates", "Prompt template tools");
    templates->require_subcommand(1);
    std::string template_language;
    auto* generate = templates->add_subcommand("generate", "Translate the answering template into a language");
    add_common_flags(generate, common, true);
    generate->add_option("--language", template_language, "Target language code")->required();
    auto* list = templates->add_subcommand("list", "List available templates");
    list->add_option("--templates", common.templates_dir)->check(CLI::ExistingDirectory);

    std::vector<std::string> argv_store{"xlprobe"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }

    std::optional<Session> session;
    try {
        if (list->parsed()) {
            cmd_templates_list(common, out);
            return exit_ok;
        }
        const SearchOverrides* ov = srch->parsed() ? &overrides : nullptr;
        std::string name = app.get_subcommands().front()->get_name();
        if (generate->parsed()) name = "templates generate";
        Session& s = session.emplace();
        open_session(s, name, common, ov);
        s.run_id = common.run_id;
        if (seed->parsed()) cmd_seed(s, seed_args, out);
        else if (srch->parsed()) cmd_search(s, search_args, out);
        else if (eval->parsed()) cmd_evaluate(s, eval_in, by_origin, out);
        else if (expand->parsed()) cmd_expand(s, expand_in, languages, out);
        else if (affinity->parsed()) cmd_affinity(s, accuracy_path, affinity_c, out);
        else if (distance->parsed()) cmd_distance(s, embeddings_path, out);
        else if (categorize->parsed()) cmd_categorize(s, categorize_in, out);
        else if (report->parsed()) cmd_report(s, report_args, out);
        else if (exp->parsed()) cmd_export(s, export_args, out);
        else if (synth->parsed()) cmd_synth(s, synth_n, synth_choices, out);
        else if (generate->parsed()) cmd_templates_generate(s, template_language, out);
        finish(s);
        return exit_ok;
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        err << "error: " << e.what() << "\n";
        if (session) {
            try {
                write_manifest(*session, code, e.what());
            } catch (const std::exception&) {
            }
        }
        return code;
    }
}

}  // namespace xlprobe::cli
