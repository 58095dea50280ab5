#pragma once

#include <atomic>
#include <condition_variable>
#include <chrono>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xlprobe/core/config.hpp"
#include "xlprobe/core/cost_ledger.hpp"
#include "xlprobe/core/model_spec.hpp"
#include "xlprobe/gateway/backend.hpp"
#include "xlprobe/gateway/errors.hpp"
#include "xlprobe/gateway/mock.hpp"
#include "xlprobe/gateway/transcript.hpp"

namespace xlprobe::gateway {

struct Completion {
    std::string model;
    std::string text;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    bool cached = false;
    bool approximate_usage = false;
    std::int64_t latency_ms = 0;
};

struct Request {
    ModelSpec model;
    std::string prompt;
    std::optional<double> temperature;  // defaults to model.temperature
    std::optional<int> max_tokens;      // defaults to model.max_tokens
};

// Slot of a batch: exactly one of the two is set.
struct BatchResult {
    std::optional<Completion> completion;
    std::optional<BackendError> error;

    bool ok() const { return completion.has_value(); }
};

enum class Mode { live, offline };

/// Counting semaphore with a runtime limit.
class Semaphore {
public:
    explicit Semaphore(int limit) : available_(limit) {}
    void acquire();
    void release();

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int available_;
};

/// Single entry point to every model backend. Thread-safe.
///
/// Calls at or below the deterministic temperature threshold are cached by
/// (model, prompt, max_tokens, temperature bucket); concurrent identical
/// calls share one backend invocation. Transient failures (timeouts, 429,
/// 5xx) are retried with exponential backoff and jitter. Every completion
/// updates the cost ledger; cache hits add nothing.
class Gateway {
public:
    explicit Gateway(GatewaySettings settings = {}, Mode mode = Mode::live);
    ~Gateway();

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    void register_mock(const std::string& scenario, MockScript script);

    /// Routes every request to recorded responses instead of real backends.
    void use_replay(const std::vector<TranscriptEntry>& entries);
    /// Replaces the HTTP transport (tests inject fakes here).
    void set_network_backend(std::unique_ptr<Backend> backend);
    void record_transcript(bool on) { recording_ = on; }
    const TranscriptRecorder& transcript() const { return recorder_; }

    Completion complete(const ModelSpec& model, std::string_view prompt, double temperature, int max_tokens);
    Completion complete(const Request& request);

    /// Results come back in request order; failures are returned in their slot.
    std::vector<BatchResult> complete_batch(std::span<const Request> requests);

    /// Runs fn(0..n-1) on at most `concurrency` worker threads. The first
    /// exception (by index) is rethrown after every task has finished.
    void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) const;

    CostLedger& ledger() { return ledger_; }
    const CostLedger& ledger() const { return ledger_; }

    const GatewaySettings& settings() const { return settings_; }
    Mode mode() const { return mode_; }
    bool is_cacheable(double temperature) const { return temperature <= settings_.deterministic_threshold; }

    std::int64_t network_calls() const { return network_calls_.load(); }
    std::int64_t backend_invocations() const { return backend_invocations_.load(); }

private:
    struct CachedValue {
        std::string text;
        std::int64_t prompt_tokens = 0;
        std::int64_t completion_tokens = 0;
        bool approximate = false;
    };

    Backend& backend_for(const ModelSpec& model);
    Semaphore& semaphore_for(const std::string& host);
    CachedValue invoke_with_retries(const ModelSpec& model, const std::string& prompt, double temperature,
                                    int max_tokens);
    std::optional<CachedValue> load_disk_cache(const std::string& key, const ModelSpec& model,
                                               const std::string& prompt, int max_tokens, double temperature);
    void store_disk_cache(const std::string& key, const ModelSpec& model, const std::string& prompt,
                          int max_tokens, double temperature, const CachedValue& v);
    void record(const ModelSpec& model, const std::string& prompt, double temperature, int max_tokens,
                const CachedValue* value, bool cached, const BackendError* error);
    void sleep_backoff(int attempt);

    GatewaySettings settings_;
    Mode mode_;
    CostLedger ledger_;
    MockBackend mocks_;
    std::unique_ptr<Backend> network_;
    std::unique_ptr<Backend> replay_;

    std::mutex cache_mu_;
    std::map<std::string, std::shared_future<CachedValue>> cache_;

    std::mutex sem_mu_;
    std::map<std::string, std::unique_ptr<Semaphore>> semaphores_;

    std::mutex rng_mu_;
    std::uint64_t rng_state_ = 0x9E3779B97F4A7C15ULL;

    std::atomic<bool> recording_{false};
    TranscriptRecorder recorder_;

    std::atomic<std::int64_t> network_calls_{0};
    std::atomic<std::int64_t> backend_invocations_{0};
};

/// Rough token estimate used when a backend omits usage: code points / 4, rounded up.
std::int64_t estimate_tokens(std::string_view text);

}  // namespace xlprobe::gateway
