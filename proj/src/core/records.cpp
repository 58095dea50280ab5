#include "xlprobe/core/records.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "xlprobe/core/errors.hpp"

namespace xlprobe {

using nlohmann::json;

namespace {

// Reads optional keys into `dst`, rejecting keys the type does not know.
class FieldReader {
public:
    FieldReader(const json& j, std::string what) : j_(j), what_(std::move(what)) {
        if (!j_.is_object()) throw ConfigError(what_ + " must be an object");
    }
    template <typename T>
    void opt(const char* key, T& dst) {
        known_.insert(key);
        if (j_.contains(key)) dst = j_.at(key).get<T>();
    }
    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!known_.count(k)) throw ConfigError(what_ + ": unknown key '" + k + "'");
    }

private:
    const json& j_;
    std::string what_;
    std::set<std::string> known_;
};

json token_counts_json(const TokenCounts& c) {
    return json{{"prompt", c.prompt}, {"completion", c.completion}, {"approx_prompt", c.approx_prompt},
                {"approx_completion", c.approx_completion}, {"calls", c.calls}};
}

TokenCounts token_counts_from(const json& j) {
    TokenCounts c;
    c.prompt = j.at("prompt").get<std::int64_t>();
    c.completion = j.at("completion").get<std::int64_t>();
    c.approx_prompt = j.value("approx_prompt", std::int64_t{0});
    c.approx_completion = j.value("approx_completion", std::int64_t{0});
    c.calls = j.value("calls", std::int64_t{0});
    return c;
}

json usage_json(const UsageByModel& u) {
    json out = json::object();
    for (const auto& [m, c] : u) out[m] = token_counts_json(c);
    return out;
}

UsageByModel usage_from(const json& j) {
    UsageByModel u;
    for (const auto& [m, c] : j.items()) u[m] = token_counts_from(c);
    return u;
}

}  // namespace

void to_json(json& j, const QuestionRecord& v) {
    j = json{{"id", v.id}, {"source_dataset", std::string(to_string(v.source_dataset))}, {"text", v.text},
             {"choices", v.choices}, {"answer_index", v.answer_index}};
}

void from_json(const json& j, QuestionRecord& v) {
    v.id = j.at("id").get<std::string>();
    v.source_dataset = parse_source_dataset(j.at("source_dataset").get<std::string>());
    v.text = j.at("text").get<std::string>();
    v.choices = j.at("choices").get<std::vector<std::string>>();
    v.answer_index = j.at("answer_index").get<int>();
}

void to_json(json& j, const LocalizedQuestion& v) {
    j = json{{"language", v.language}, {"text", v.text}, {"choices", v.choices}, {"answer_index", v.answer_index}};
}

void from_json(const json& j, LocalizedQuestion& v) {
    v.language = j.at("language").get<std::string>();
    v.text = j.at("text").get<std::string>();
    v.choices = j.at("choices").get<std::vector<std::string>>();
    v.answer_index = j.at("answer_index").get<int>();
}

void to_json(json& j, const PerturbationStep& v) {
    j = json{{"distractor_index", v.distractor_index}, {"english_fragment", v.english_fragment},
             {"target_fragment", v.target_fragment}, {"proxy_model", v.proxy_model},
             {"created_at_ms", v.created_at_ms}};
}

void from_json(const json& j, PerturbationStep& v) {
    v.distractor_index = j.at("distractor_index").get<int>();
    v.english_fragment = j.at("english_fragment").get<std::string>();
    v.target_fragment = j.at("target_fragment").get<std::string>();
    v.proxy_model = j.at("proxy_model").get<std::string>();
    v.created_at_ms = j.at("created_at_ms").get<std::int64_t>();
}

void to_json(json& j, const BilingualPair& v) {
    j = json{{"pair_id", v.pair_id}, {"seed_id", v.seed_id}, {"english", v.english}, {"target", v.target},
             {"depth", v.depth}, {"lineage", v.lineage}};
    j["parent_id"] = v.parent_id ? json(*v.parent_id) : json(nullptr);
    if (v.origin_language) j["origin_language"] = *v.origin_language;
}

void from_json(const json& j, BilingualPair& v) {
    v.pair_id = j.at("pair_id").get<std::string>();
    v.seed_id = j.at("seed_id").get<std::string>();
    v.english = j.at("english").get<LocalizedQuestion>();
    v.target = j.at("target").get<LocalizedQuestion>();
    v.depth = j.at("depth").get<int>();
    v.lineage = j.at("lineage").get<std::vector<PerturbationStep>>();
    const auto& p = j.at("parent_id");
    v.parent_id = p.is_null() ? std::nullopt : std::optional<std::string>(p.get<std::string>());
    if (j.contains("origin_language") && !j.at("origin_language").is_null())
        v.origin_language = j.at("origin_language").get<std::string>();
    else
        v.origin_language.reset();
}

void to_json(json& j, const SimulationResult& v) {
    j = json{{"pair_id", v.pair_id},         {"models", v.models},           {"english_correct", v.english_correct},
             {"target_correct", v.target_correct}, {"english_mean", v.english_mean}, {"target_mean", v.target_mean},
             {"score", v.score},             {"gamma", v.gamma}};
}

void from_json(const json& j, SimulationResult& v) {
    v.pair_id = j.at("pair_id").get<std::string>();
    v.models = j.at("models").get<std::vector<std::string>>();
    v.english_correct = j.at("english_correct").get<std::vector<bool>>();
    v.target_correct = j.at("target_correct").get<std::vector<bool>>();
    v.english_mean = j.at("english_mean").get<double>();
    v.target_mean = j.at("target_mean").get<double>();
    v.score = j.at("score").get<double>();
    v.gamma = j.at("gamma").get<double>();
}

void to_json(json& j, const CandidateRecord& v) {
    j = json{{"pair", v.pair}, {"score", v.score}, {"simulation", v.simulation}, {"run_id", v.run_id},
             {"admitted_at_depth", v.admitted_at_depth}};
}

void from_json(const json& j, CandidateRecord& v) {
    v.pair = j.at("pair").get<BilingualPair>();
    v.score = j.at("score").get<double>();
    v.simulation = j.at("simulation").get<SimulationResult>();
    v.run_id = j.at("run_id").get<std::string>();
    v.admitted_at_depth = j.at("admitted_at_depth").get<int>();
}

void to_json(json& j, const SearchRunStats& v) {
    j = json{{"run_id", v.run_id},
             {"language", v.language},
             {"seeds_attempted", v.seeds_attempted},
             {"seeds_converted", v.seeds_converted},
             {"candidates", v.candidates},
             {"levels_explored", v.levels_explored},
             {"total_pairs_scored", v.total_pairs_scored},
             {"wall_time_s", v.wall_time_s},
             {"dollars", v.dollars}};
}

void from_json(const json& j, SearchRunStats& v) {
    v.run_id = j.at("run_id").get<std::string>();
    v.language = j.at("language").get<std::string>();
    v.seeds_attempted = j.at("seeds_attempted").get<std::int64_t>();
    v.seeds_converted = j.at("seeds_converted").get<std::int64_t>();
    v.candidates = j.at("candidates").get<std::int64_t>();
    v.levels_explored = j.at("levels_explored").get<std::int64_t>();
    v.total_pairs_scored = j.at("total_pairs_scored").get<std::int64_t>();
    v.wall_time_s = j.at("wall_time_s").get<double>();
    v.dollars = j.at("dollars").get<double>();
}

void to_json(json& j, const CostLedger& v) {
    json prices = json::object();
    for (const auto& [m, p] : v.prices())
        prices[m] = json{{"prompt_per_1k", p.prompt_per_1k}, {"completion_per_1k", p.completion_per_1k}};
    json attributions = json::object();
    json language_dollars = json::object();
    for (const auto& [lang, runs] : v.attributions()) {
        json r = json::object();
        for (const auto& [run, a] : runs) r[run] = json{{"candidates", a.candidates}, {"usage", usage_json(a.usage)}};
        attributions[lang] = std::move(r);
        language_dollars[lang] = v.language_dollars(lang);
    }
    j = json{{"prices", prices},
             {"usage", usage_json(v.usage())},
             {"attributions", attributions},
             {"dollars", v.total_dollars()},
             {"language_dollars", language_dollars}};
}

void from_json(const json& j, CostLedger& v) {
    CostLedger out;
    for (const auto& [m, p] : j.at("prices").items())
        out.set_price(m, Price{p.at("prompt_per_1k").get<double>(), p.at("completion_per_1k").get<double>()});
    for (const auto& [m, c] : usage_from(j.at("usage"))) out.add_usage(m, c);
    for (const auto& [lang, runs] : j.at("attributions").items())
        for (const auto& [run, a] : runs.items())
            out.attribute(lang, run, usage_from(a.at("usage")), a.at("candidates").get<std::int64_t>());
    out.validate();
    // Dollar figures are derived; the stored copies must agree with a recomputation.
    if (j.contains("dollars") && std::abs(j.at("dollars").get<double>() - out.total_dollars()) > 1e-9)
        throw InvariantError("dollars", "does not match token counts and price table");
    if (j.contains("language_dollars"))
        for (const auto& [lang, d] : j.at("language_dollars").items())
            if (std::abs(d.get<double>() - out.language_dollars(lang)) > 1e-9)
                throw InvariantError("language_dollars." + lang, "does not match token counts and price table");
    v = out;
}

void to_json(json& j, const SearchConfig& v) {
    j = json{{"batch_size", v.batch_size},
             {"beam_width", v.beam_width},
             {"depth_initial", v.depth_initial},
             {"depth_extended", v.depth_extended},
             {"redundancy_cap", v.redundancy_cap},
             {"score_exponent", v.score_exponent},
             {"inclusion_threshold", v.inclusion_threshold},
             {"potential_threshold", v.potential_threshold},
             {"english_tolerance", v.english_tolerance},
             {"perturbation_temperature", v.perturbation_temperature},
             {"deterministic_temperature", v.deterministic_temperature},
             {"max_output_tokens", v.max_output_tokens},
             {"affinity_constant", v.affinity_constant},
             {"perturbation_retries", v.perturbation_retries}};
    j["branching_per_pair"] = v.branching_per_pair ? json(*v.branching_per_pair) : json("all_distractors");
}

void from_json(const json& j, SearchConfig& v) {
    SearchConfig c;
    FieldReader r(j, "search");
    r.opt("batch_size", c.batch_size);
    r.opt("beam_width", c.beam_width);
    r.opt("depth_initial", c.depth_initial);
    r.opt("depth_extended", c.depth_extended);
    r.opt("redundancy_cap", c.redundancy_cap);
    r.opt("score_exponent", c.score_exponent);
    r.opt("inclusion_threshold", c.inclusion_threshold);
    r.opt("potential_threshold", c.potential_threshold);
    r.opt("english_tolerance", c.english_tolerance);
    r.opt("perturbation_temperature", c.perturbation_temperature);
    r.opt("deterministic_temperature", c.deterministic_temperature);
    r.opt("max_output_tokens", c.max_output_tokens);
    r.opt("affinity_constant", c.affinity_constant);
    r.opt("perturbation_retries", c.perturbation_retries);
    json branching;
    r.opt("branching_per_pair", branching);
    r.finish();
    if (branching.is_number_integer()) {
        c.branching_per_pair = branching.get<int>();
    } else if (!branching.is_null() && !(branching.is_string() && branching.get<std::string>() == "all_distractors")) {
        throw ConfigError("search: branching_per_pair must be an integer or \"all_distractors\"");
    }
    v = c;
}

void to_json(json& j, const GatewaySettings& v) {
    j = json{{"concurrency", v.concurrency},         {"max_attempts", v.max_attempts},
             {"backoff_base_ms", v.backoff_base_ms}, {"timeout_ms", v.timeout_ms},
             {"deterministic_threshold", v.deterministic_threshold}, {"cache_dir", v.cache_dir}};
}

void from_json(const json& j, GatewaySettings& v) {
    GatewaySettings g;
    FieldReader r(j, "gateway");
    r.opt("concurrency", g.concurrency);
    r.opt("max_attempts", g.max_attempts);
    r.opt("backoff_base_ms", g.backoff_base_ms);
    r.opt("timeout_ms", g.timeout_ms);
    r.opt("deterministic_threshold", g.deterministic_threshold);
    r.opt("cache_dir", g.cache_dir);
    r.finish();
    v = g;
}

void to_json(json& j, const ModelSpec& v) {
    std::vector<std::string> roles;
    for (auto r : v.roles) roles.emplace_back(to_string(r));
    j = json{{"name", v.name},
             {"roles", roles},
             {"endpoint", v.endpoint},
             {"api_key_env", v.api_key_env},
             {"model_id", v.model_id},
             {"temperature", v.temperature},
             {"max_tokens", v.max_tokens},
             {"prompt_price", v.prompt_price},
             {"completion_price", v.completion_price}};
}

void from_json(const json& j, ModelSpec& v) {
    ModelSpec m;
    std::vector<std::string> roles;
    FieldReader r(j, "model");
    r.opt("name", m.name);
    r.opt("roles", roles);
    r.opt("endpoint", m.endpoint);
    r.opt("api_key_env", m.api_key_env);
    r.opt("model_id", m.model_id);
    r.opt("temperature", m.temperature);
    r.opt("max_tokens", m.max_tokens);
    r.opt("prompt_price", m.prompt_price);
    r.opt("completion_price", m.completion_price);
    r.finish();
    for (const auto& role : roles) m.roles.insert(parse_role(role));
    v = m;
}

namespace {

template <typename T>
void validate_record(const T& item) {
    item.validate();
}

}  // namespace

template <typename T>
std::string to_record_line(const T& item) {
    validate_record(item);
    json j = item;
    j["kind"] = RecordKind<T>::name;
    return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

template <typename T>
T from_record_line(std::string_view line, std::size_t line_number) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(line_number, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line_number, "record is not an object");
    if (!j.contains("kind") || j.at("kind") != RecordKind<T>::name)
        throw ParseError(line_number, "expected record kind '" + std::string(RecordKind<T>::name) + "'");
    T item;
    try {
        item = j.get<T>();
    } catch (const json::exception& e) {
        throw ParseError(line_number, e.what());
    } catch (const InvariantError& e) {
        throw InvariantError(e.field(), "line " + std::to_string(line_number) + ": " + e.what());
    }
    try {
        validate_record(item);
    } catch (const InvariantError& e) {
        throw InvariantError(e.field(), "line " + std::to_string(line_number) + ": " + e.what());
    }
    return item;
}

template <typename T>
void save_records(const std::filesystem::path& path, std::span<const T> items) {
    std::string out;
    for (const auto& item : items) {
        out += to_record_line(item);
        out += '\n';
    }
    write_text_file(path, out);
}

template <typename T>
std::vector<T> load_records(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::vector<T> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        ++line_no;
        std::size_t end = text.find('\n', pos);
        const bool last = end == std::string::npos;
        if (last) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) throw ParseError(line_no, "empty line");
        out.push_back(from_record_line<T>(line, line_no));
        pos = end + 1;
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw IoError("write to '" + path.string() + "' failed");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

#define XLPROBE_INSTANTIATE_RECORDS(T)                                                        \
    template std::string to_record_line<T>(const T&);                                        \
    template T from_record_line<T>(std::string_view, std::size_t);                           \
    template void save_records<T>(const std::filesystem::path&, std::span<const T>);         \
    template std::vector<T> load_records<T>(const std::filesystem::path&);

XLPROBE_INSTANTIATE_RECORDS(QuestionRecord)
XLPROBE_INSTANTIATE_RECORDS(BilingualPair)
XLPROBE_INSTANTIATE_RECORDS(SimulationResult)
XLPROBE_INSTANTIATE_RECORDS(CandidateRecord)
XLPROBE_INSTANTIATE_RECORDS(SearchRunStats)
XLPROBE_INSTANTIATE_RECORDS(CostLedger)

#undef XLPROBE_INSTANTIATE_RECORDS

}  // namespace xlprobe
