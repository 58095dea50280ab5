#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xlprobe/core/config.hpp"
#include "xlprobe/core/cost_ledger.hpp"
#include "xlprobe/core/types.hpp"

namespace xlprobe {

// Line-delimited JSON: one object per line, each tagged with "kind".

template <typename T>
struct RecordKind;

template <> struct RecordKind<QuestionRecord>   { static constexpr std::string_view name = "question"; };
template <> struct RecordKind<BilingualPair>    { static constexpr std::string_view name = "bilingual_pair"; };
template <> struct RecordKind<SimulationResult> { static constexpr std::string_view name = "simulation_result"; };
template <> struct RecordKind<CandidateRecord>  { static constexpr std::string_view name = "candidate"; };
template <> struct RecordKind<SearchRunStats>   { static constexpr std::string_view name = "search_run_stats"; };
template <> struct RecordKind<CostLedger>       { static constexpr std::string_view name = "cost_ledger"; };

void to_json(nlohmann::json& j, const QuestionRecord& v);
void from_json(const nlohmann::json& j, QuestionRecord& v);
void to_json(nlohmann::json& j, const LocalizedQuestion& v);
void from_json(const nlohmann::json& j, LocalizedQuestion& v);
void to_json(nlohmann::json& j, const PerturbationStep& v);
void from_json(const nlohmann::json& j, PerturbationStep& v);
void to_json(nlohmann::json& j, const BilingualPair& v);
void from_json(const nlohmann::json& j, BilingualPair& v);
void to_json(nlohmann::json& j, const SimulationResult& v);
void from_json(const nlohmann::json& j, SimulationResult& v);
void to_json(nlohmann::json& j, const CandidateRecord& v);
void from_json(const nlohmann::json& j, CandidateRecord& v);
void to_json(nlohmann::json& j, const SearchRunStats& v);
void from_json(const nlohmann::json& j, SearchRunStats& v);
void to_json(nlohmann::json& j, const CostLedger& v);
void from_json(const nlohmann::json& j, CostLedger& v);
void to_json(nlohmann::json& j, const SearchConfig& v);
void from_json(const nlohmann::json& j, SearchConfig& v);
void to_json(nlohmann::json& j, const GatewaySettings& v);
void from_json(const nlohmann::json& j, GatewaySettings& v);
void to_json(nlohmann::json& j, const ModelSpec& v);
void from_json(const nlohmann::json& j, ModelSpec& v);

/// Serialises one record to a single line (no trailing newline).
template <typename T>
std::string to_record_line(const T& item);

/// Parses and validates one line. Throws ParseError / InvariantError.
template <typename T>
T from_record_line(std::string_view line, std::size_t line_number = 1);

template <typename T>
void save_records(const std::filesystem::path& path, std::span<const T> items);

template <typename T>
void save_records(const std::filesystem::path& path, const std::vector<T>& items) {
    save_records<T>(path, std::span<const T>(items));
}

template <typename T>
std::vector<T> load_records(const std::filesystem::path& path);

/// Writes `content` to `path` (creating parent directories).
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace xlprobe
