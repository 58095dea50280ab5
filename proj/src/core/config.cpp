#include "xlprobe/core/config.hpp"

#include <set>

#include "xlprobe/core/errors.hpp"
#include "xlprobe/core/records.hpp"

namespace xlprobe {

std::string_view to_string(Role r) {
    switch (r) {
        case Role::proxy: return "proxy";
        case Role::translator: return "translator";
        case Role::judge: return "judge";
        case Role::simulator: return "simulator";
        case Role::target: return "target";
    }
    return "?";
}

Role parse_role(std::string_view name) {
    for (auto r : {Role::proxy, Role::translator, Role::judge, Role::simulator, Role::target})
        if (to_string(r) == name) return r;
    throw ConfigError("unknown model role '" + std::string(name) + "'");
}

void ModelSpec::validate() const {
    if (name.empty()) throw ConfigError("model name is empty");
    const std::string where = "model '" + name + "': ";
    if (roles.empty()) throw ConfigError(where + "no roles");
    if (endpoint.empty()) throw ConfigError(where + "endpoint is empty");
    if (is_mock()) {
        if (mock_scenario().empty()) throw ConfigError(where + "mock endpoint needs a scenario name");
    } else if (endpoint.rfind("http://", 0) != 0 && endpoint.rfind("https://", 0) != 0) {
        throw ConfigError(where + "endpoint must be http(s):// or mock:<scenario>");
    }
    if (temperature < 0.0) throw ConfigError(where + "temperature must be >= 0");
    if (max_tokens < 1) throw ConfigError(where + "max_tokens must be >= 1");
    if (prompt_price < 0.0 || completion_price < 0.0) throw ConfigError(where + "prices must be >= 0");
}

void SearchConfig::validate() const {
    const auto fail = [](const std::string& m) { throw ConfigError("search config: " + m); };
    if (batch_size < 1) fail("batch_size (W) must be >= 1");
    if (beam_width < 1) fail("beam_width (w) must be >= 1");
    if (depth_initial < 1) fail("depth_initial (d1) must be >= 1");
    if (depth_extended < depth_initial) fail("depth_extended (d2) must be >= depth_initial (d1)");
    if (redundancy_cap < 1) fail("redundancy_cap (r) must be >= 1");
    if (!(score_exponent > 1.0)) fail("score_exponent (gamma) must be > 1");
    if (inclusion_threshold < 0.0 || inclusion_threshold > 1.0) fail("inclusion_threshold must be in [0, 1]");
    if (potential_threshold < 0.0 || potential_threshold > 1.0) fail("potential_threshold must be in [0, 1]");
    if (inclusion_threshold < potential_threshold) fail("inclusion_threshold must be >= potential_threshold");
    if (english_tolerance < 0.0 || english_tolerance > 1.0) fail("english_tolerance must be in [0, 1]");
    if (branching_per_pair && *branching_per_pair < 1) fail("branching_per_pair must be >= 1");
    if (perturbation_temperature < 0.0 || deterministic_temperature < 0.0) fail("temperatures must be >= 0");
    if (max_output_tokens < 1) fail("max_output_tokens must be >= 1");
    if (!(affinity_constant < 0.0)) fail("affinity_constant (c) must be < 0");
    if (perturbation_retries < 1) fail("perturbation_retries must be >= 1");
}

void GatewaySettings::validate() const {
    if (concurrency < 1) throw ConfigError("gateway: concurrency must be >= 1");
    if (max_attempts < 1) throw ConfigError("gateway: max_attempts must be >= 1");
    if (backoff_base_ms < 0) throw ConfigError("gateway: backoff_base_ms must be >= 0");
    if (timeout_ms < 1) throw ConfigError("gateway: timeout_ms must be >= 1");
    if (deterministic_threshold < 0.0) throw ConfigError("gateway: deterministic_threshold must be >= 0");
}

void RunConfig::validate() const {
    search.validate();
    gateway.validate();
    std::set<std::string> names;
    for (const auto& m : models) {
        m.validate();
        if (!names.insert(m.name).second) throw ConfigError("duplicate model name '" + m.name + "'");
    }
}

const ModelSpec& RunConfig::model(const std::string& name) const {
    for (const auto& m : models)
        if (m.name == name) return m;
    throw ConfigError("no model named '" + name + "' in roster");
}

std::vector<ModelSpec> RunConfig::with_role(Role r) const {
    std::vector<ModelSpec> out;
    for (const auto& m : models)
        if (m.has_role(r)) out.push_back(m);
    return out;
}

RunConfig parse_run_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("run config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    RunConfig cfg;
    try {
        if (j.contains("search")) cfg.search = j.at("search").get<SearchConfig>();
        if (j.contains("gateway")) cfg.gateway = j.at("gateway").get<GatewaySettings>();
        if (j.contains("models")) cfg.models = j.at("models").get<std::vector<ModelSpec>>();
        if (j.contains("offline")) cfg.offline = j.at("offline");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    } catch (const InvariantError& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    try {
        return parse_run_config(read_text_file(path));
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace xlprobe
