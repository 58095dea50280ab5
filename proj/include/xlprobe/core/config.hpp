#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlprobe/core/model_spec.hpp"

namespace xlprobe {

/// Search hyperparameters. Defaults are the values used for the published
/// sixteen-language dataset.
struct SearchConfig {
    int batch_size = 4;        // W: seeds searched together in one beam pool
    int beam_width = 12;       // w
    int depth_initial = 4;     // d1
    int depth_extended = 6;    // d2
    int redundancy_cap = 3;    // r
    double score_exponent = 2.0;        // gamma
    double inclusion_threshold = 0.8;   // theta_inc
    double potential_threshold = 0.6;   // theta_pot
    // Reported only; the score exponent is what penalises English errors.
    double english_tolerance = 0.0;
    // nullopt = one child per incorrect option.
    std::optional<int> branching_per_pair;
    double perturbation_temperature = 0.7;
    double deterministic_temperature = 0.001;
    int max_output_tokens = 1024;
    double affinity_constant = -1.0;
    int perturbation_retries = 3;

    int max_depth() const { return depth_extended > depth_initial ? depth_extended : depth_initial; }

    void validate() const;
    bool operator==(const SearchConfig&) const = default;
};

struct GatewaySettings {
    int concurrency = 8;
    int max_attempts = 3;
    int backoff_base_ms = 200;
    int timeout_ms = 120000;
    double deterministic_threshold = 0.01;
    std::string cache_dir;

    void validate() const;
    bool operator==(const GatewaySettings&) const = default;
};

/// Contents of a run-config file: search hyperparameters, the model roster,
/// gateway settings, and free-form options for the offline scenario pack.
struct RunConfig {
    SearchConfig search;
    std::vector<ModelSpec> models;
    GatewaySettings gateway;
    nlohmann::json offline = nlohmann::json::object();

    void validate() const;
    const ModelSpec& model(const std::string& name) const;
    std::vector<ModelSpec> with_role(Role r) const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace xlprobe
