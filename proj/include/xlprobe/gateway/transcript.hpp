#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "xlprobe/gateway/backend.hpp"

namespace xlprobe::gateway {

/// One prompt/response exchange as seen by the gateway.
struct TranscriptEntry {
    std::string model;
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = 0;
    std::string text;
    std::optional<std::int64_t> prompt_tokens;
    std::optional<std::int64_t> completion_tokens;
    bool cached = false;
    std::optional<std::string> error_kind;
    std::string error_message;

    bool operator==(const TranscriptEntry&) const = default;
};

std::int64_t temperature_bucket(double temperature);

/// Collects entries from concurrent callers. `save` writes them ordered by
/// request key, keeping arrival order among identical keys, so the file does
/// not depend on thread scheduling.
class TranscriptRecorder {
public:
    void append(TranscriptEntry e);
    std::vector<TranscriptEntry> entries() const;
    void save(const std::filesystem::path& path) const;

private:
    mutable std::mutex mu_;
    std::vector<TranscriptEntry> entries_;
};

std::vector<TranscriptEntry> load_transcript(const std::filesystem::path& path);

/// Serves recorded responses. Identical requests are answered in recorded
/// order; once a key's queue is down to its last entry that entry is reused.
class ReplayBackend final : public Backend {
public:
    explicit ReplayBackend(const std::vector<TranscriptEntry>& entries);

    BackendReply invoke(const ModelSpec& model, const std::string& prompt, double temperature,
                        int max_tokens) override;

private:
    using Key = std::tuple<std::string, std::string, int, std::int64_t>;
    std::mutex mu_;
    std::map<Key, std::deque<TranscriptEntry>> queues_;
};

}  // namespace xlprobe::gateway
