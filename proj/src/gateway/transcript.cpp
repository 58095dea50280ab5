#include "xlprobe/gateway/transcript.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xlprobe/core/records.hpp"
#include "xlprobe/gateway/errors.hpp"

namespace xlprobe::gateway {
namespace {

using nlohmann::json;

json entry_to_json(const TranscriptEntry& e) {
    json j{{"model", e.model},
           {"prompt", e.prompt},
           {"temperature", e.temperature},
           {"max_tokens", e.max_tokens},
           {"text", e.text},
           {"cached", e.cached}};
    j["prompt_tokens"] = e.prompt_tokens ? json(*e.prompt_tokens) : json(nullptr);
    j["completion_tokens"] = e.completion_tokens ? json(*e.completion_tokens) : json(nullptr);
    if (e.error_kind) {
        j["error_kind"] = *e.error_kind;
        j["error_message"] = e.error_message;
    }
    return j;
}

TranscriptEntry entry_from_json(const json& j) {
    TranscriptEntry e;
    e.model = j.at("model").get<std::string>();
    e.prompt = j.at("prompt").get<std::string>();
    e.temperature = j.at("temperature").get<double>();
    e.max_tokens = j.at("max_tokens").get<int>();
    e.text = j.at("text").get<std::string>();
    e.cached = j.at("cached").get<bool>();
    if (!j.at("prompt_tokens").is_null()) e.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
    if (!j.at("completion_tokens").is_null()) e.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
    if (auto k = j.find("error_kind"); k != j.end()) {
        e.error_kind = k->get<std::string>();
        e.error_message = j.value("error_message", "");
    }
    return e;
}

auto sort_key(const TranscriptEntry& e) {
    return std::tie(e.model, e.prompt, e.max_tokens);
}

}  // namespace

std::int64_t temperature_bucket(double temperature) { return std::llround(temperature * 1000.0); }

void TranscriptRecorder::append(TranscriptEntry e) {
    std::lock_guard lock(mu_);
    entries_.push_back(std::move(e));
}

std::vector<TranscriptEntry> TranscriptRecorder::entries() const {
    std::lock_guard lock(mu_);
    return entries_;
}

void TranscriptRecorder::save(const std::filesystem::path& path) const {
    auto sorted = entries();
    std::stable_sort(sorted.begin(), sorted.end(), [](const TranscriptEntry& a, const TranscriptEntry& b) {
        const auto ba = temperature_bucket(a.temperature), bb = temperature_bucket(b.temperature);
        return std::tuple_cat(sort_key(a), std::tie(ba)) < std::tuple_cat(sort_key(b), std::tie(bb));
    });
    std::string out;
    for (const auto& e : sorted) {
        out += entry_to_json(e).dump(-1, ' ', false, json::error_handler_t::strict);
        out += '\n';
    }
    write_text_file(path, out);
}

std::vector<TranscriptEntry> load_transcript(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open transcript " + path.string());
    std::vector<TranscriptEntry> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(entry_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ParseError(n, std::string("transcript entry: ") + e.what());
        }
    }
    return out;
}

ReplayBackend::ReplayBackend(const std::vector<TranscriptEntry>& entries) {
    for (const auto& e : entries)
        queues_[Key{e.model, e.prompt, e.max_tokens, temperature_bucket(e.temperature)}].push_back(e);
    // Cache hits only matter when the key has no fresh invocation on record
    // (the recording run was served from a persisted cache).
    for (auto& [key, q] : queues_) {
        const bool any_fresh = std::any_of(q.begin(), q.end(), [](const TranscriptEntry& e) { return !e.cached; });
        if (any_fresh) std::erase_if(q, [](const TranscriptEntry& e) { return e.cached; });
    }
}

BackendReply ReplayBackend::invoke(const ModelSpec& model, const std::string& prompt, double temperature,
                                   int max_tokens) {
    TranscriptEntry e;
    {
        std::lock_guard lock(mu_);
        auto it = queues_.find(Key{model.name, prompt, max_tokens, temperature_bucket(temperature)});
        if (it == queues_.end() || it->second.empty())
            throw BackendError(BackendErrorKind::replay_miss,
                               "no recorded response for model '" + model.name + "' and prompt '" +
                                   prompt.substr(0, 60) + "...'",
                               false);
        e = it->second.front();
        if (it->second.size() > 1) it->second.pop_front();
    }
    if (e.error_kind) throw BackendError(parse_backend_error_kind(*e.error_kind), e.error_message, false);
    return {e.text, e.prompt_tokens, e.completion_tokens};
}

}  // namespace xlprobe::gateway
