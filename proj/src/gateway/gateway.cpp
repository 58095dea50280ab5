#include "xlprobe/gateway/gateway.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "xlprobe/core/hash.hpp"
#include "xlprobe/core/records.hpp"
#include "xlprobe/gateway/http_backend.hpp"

namespace xlprobe::gateway {
namespace {

using nlohmann::json;

std::string cache_key(const ModelSpec& model, const std::string& prompt, int max_tokens, double temperature) {
    const std::string mt = std::to_string(max_tokens);
    const std::string tb = std::to_string(temperature_bucket(temperature));
    return content_id({model.name, prompt, mt, tb});
}

std::string host_of(const ModelSpec& model) {
    if (model.is_mock()) return model.endpoint;
    const auto scheme_end = model.endpoint.find("://");
    if (scheme_end == std::string::npos) return model.endpoint;
    return model.endpoint.substr(0, model.endpoint.find('/', scheme_end + 3));
}

// Message without the "<kind>: " prefix BackendError adds.
std::string bare_message(const BackendError& e) {
    std::string msg = e.what();
    const std::string prefix = std::string(to_string(e.kind())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
    return msg;
}

class SemaphoreGuard {
public:
    explicit SemaphoreGuard(Semaphore& s) : s_(s) { s_.acquire(); }
    ~SemaphoreGuard() { s_.release(); }
    SemaphoreGuard(const SemaphoreGuard&) = delete;
    SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

private:
    Semaphore& s_;
};

}  // namespace

std::int64_t estimate_tokens(std::string_view text) {
    std::int64_t code_points = 0;
    for (unsigned char c : text)
        if ((c & 0xC0) != 0x80) ++code_points;
    return (code_points + 3) / 4;
}

void Semaphore::acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return available_ > 0; });
    --available_;
}

void Semaphore::release() {
    {
        std::lock_guard lock(mu_);
        ++available_;
    }
    cv_.notify_one();
}

Gateway::Gateway(GatewaySettings settings, Mode mode) : settings_(std::move(settings)), mode_(mode) {
    settings_.validate();
}

Gateway::~Gateway() = default;

void Gateway::register_mock(const std::string& scenario, MockScript script) {
    mocks_.register_scenario(scenario, std::move(script));
}

void Gateway::use_replay(const std::vector<TranscriptEntry>& entries) {
    replay_ = std::make_unique<ReplayBackend>(entries);
}

void Gateway::set_network_backend(std::unique_ptr<Backend> backend) { network_ = std::move(backend); }

Backend& Gateway::backend_for(const ModelSpec& model) {
    if (replay_) return *replay_;
    if (model.is_mock()) return mocks_;
    if (mode_ == Mode::offline)
        throw BackendError(BackendErrorKind::offline_violation,
                           "model '" + model.name + "' has a network endpoint but the run is offline", false);
    if (!network_) throw BackendError(BackendErrorKind::network, "no network backend configured", false);
    return *network_;
}

Semaphore& Gateway::semaphore_for(const std::string& host) {
    std::lock_guard lock(sem_mu_);
    auto& slot = semaphores_[host];
    if (!slot) slot = std::make_unique<Semaphore>(settings_.concurrency);
    return *slot;
}

void Gateway::sleep_backoff(int attempt) {
    if (settings_.backoff_base_ms <= 0) return;
    double jitter;
    {
        std::lock_guard lock(rng_mu_);
        // splitmix64
        std::uint64_t z = (rng_state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        z ^= z >> 31;
        jitter = static_cast<double>(z >> 11) / static_cast<double>(1ULL << 53);
    }
    const double ms = settings_.backoff_base_ms * static_cast<double>(1 << (attempt - 1)) * (1.0 + 0.5 * jitter);
    std::this_thread::sleep_for(std::chrono::microseconds(static_cast<std::int64_t>(ms * 1000.0)));
}

Gateway::CachedValue Gateway::invoke_with_retries(const ModelSpec& model, const std::string& prompt,
                                                  double temperature, int max_tokens) {
    if (!network_ && !model.is_mock() && !replay_ && mode_ == Mode::live)
        network_ = std::make_unique<HttpBackend>(settings_.timeout_ms);
    Backend& backend = backend_for(model);
    Semaphore& sem = semaphore_for(host_of(model));
    for (int attempt = 1;; ++attempt) {
        try {
            BackendReply reply;
            {
                SemaphoreGuard guard(sem);
                ++backend_invocations_;
                if (backend.is_network()) ++network_calls_;
                reply = backend.invoke(model, prompt, temperature, max_tokens);
            }
            CachedValue v;
            v.text = std::move(reply.text);
            v.approximate = !reply.prompt_tokens || !reply.completion_tokens;
            v.prompt_tokens = reply.prompt_tokens.value_or(estimate_tokens(prompt));
            v.completion_tokens = reply.completion_tokens.value_or(estimate_tokens(v.text));
            return v;
        } catch (const BackendError& e) {
            if (!e.retryable() || attempt >= settings_.max_attempts) throw;
            sleep_backoff(attempt);
        }
    }
}

std::optional<Gateway::CachedValue> Gateway::load_disk_cache(const std::string& key, const ModelSpec& model,
                                                             const std::string& prompt, int max_tokens,
                                                             double temperature) {
    if (settings_.cache_dir.empty()) return std::nullopt;
    const auto path = std::filesystem::path(settings_.cache_dir) / key.substr(0, 2) / (key + ".json");
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        const json j = json::parse(in);
        if (j.at("model") != model.name || j.at("prompt") != prompt || j.at("max_tokens") != max_tokens ||
            j.at("temperature_bucket") != temperature_bucket(temperature))
            return std::nullopt;
        CachedValue v;
        v.text = j.at("text").get<std::string>();
        v.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
        v.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
        v.approximate = j.at("approximate").get<bool>();
        return v;
    } catch (const json::exception&) {
        return std::nullopt;  // corrupt entry: treat as a miss and overwrite
    }
}

void Gateway::store_disk_cache(const std::string& key, const ModelSpec& model, const std::string& prompt,
                               int max_tokens, double temperature, const CachedValue& v) {
    if (settings_.cache_dir.empty()) return;
    const auto dir = std::filesystem::path(settings_.cache_dir) / key.substr(0, 2);
    const json j{{"model", model.name},
                 {"prompt", prompt},
                 {"max_tokens", max_tokens},
                 {"temperature_bucket", temperature_bucket(temperature)},
                 {"text", v.text},
                 {"prompt_tokens", v.prompt_tokens},
                 {"completion_tokens", v.completion_tokens},
                 {"approximate", v.approximate}};
    const auto tmp = dir / (key + ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
    write_text_file(tmp, j.dump());
    std::filesystem::rename(tmp, dir / (key + ".json"));
}

void Gateway::record(const ModelSpec& model, const std::string& prompt, double temperature, int max_tokens,
                     const CachedValue* value, bool cached, const BackendError* error) {
    if (!recording_) return;
    TranscriptEntry e;
    e.model = model.name;
    e.prompt = prompt;
    e.temperature = temperature;
    e.max_tokens = max_tokens;
    e.cached = cached;
    if (value) {
        e.text = value->text;
        if (!value->approximate) {
            e.prompt_tokens = value->prompt_tokens;
            e.completion_tokens = value->completion_tokens;
        }
    }
    if (error) {
        e.error_kind = std::string(to_string(error->kind()));
        e.error_message = bare_message(*error);
    }
    recorder_.append(std::move(e));
}

Completion Gateway::complete(const Request& request) {
    return complete(request.model, request.prompt, request.temperature.value_or(request.model.temperature),
                    request.max_tokens.value_or(request.model.max_tokens));
}

Completion Gateway::complete(const ModelSpec& model, std::string_view prompt_view, double temperature,
                             int max_tokens) {
    const auto start = std::chrono::steady_clock::now();
    const std::string prompt(prompt_view);
    ledger_.set_price(model.name, Price{model.prompt_price, model.completion_price});

    auto finish = [&](const CachedValue& v, bool cached) {
        Completion c;
        c.model = model.name;
        c.text = v.text;
        c.prompt_tokens = v.prompt_tokens;
        c.completion_tokens = v.completion_tokens;
        c.cached = cached;
        c.approximate_usage = v.approximate;
        c.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
                           .count();
        return c;
    };

    auto fresh = [&]() -> CachedValue {
        try {
            CachedValue v = invoke_with_retries(model, prompt, temperature, max_tokens);
            ledger_.record(model.name, v.prompt_tokens, v.completion_tokens, v.approximate);
            return v;
        } catch (const BackendError& e) {
            record(model, prompt, temperature, max_tokens, nullptr, false, &e);
            throw;
        }
    };

    if (!is_cacheable(temperature)) {
        CachedValue v = fresh();
        record(model, prompt, temperature, max_tokens, &v, false, nullptr);
        return finish(v, false);
    }

    const std::string key = cache_key(model, prompt, max_tokens, temperature);
    std::promise<CachedValue> promise;
    std::shared_future<CachedValue> waiting;
    {
        std::lock_guard lock(cache_mu_);
        if (auto it = cache_.find(key); it != cache_.end()) {
            waiting = it->second;
        } else {
            cache_.emplace(key, promise.get_future().share());
        }
    }

    if (waiting.valid()) {
        try {
            const CachedValue& v = waiting.get();
            record(model, prompt, temperature, max_tokens, &v, true, nullptr);
            return finish(v, true);
        } catch (const BackendError& e) {
            record(model, prompt, temperature, max_tokens, nullptr, false, &e);
            throw;
        }
    }

    try {
        if (auto disk = load_disk_cache(key, model, prompt, max_tokens, temperature)) {
            record(model, prompt, temperature, max_tokens, &*disk, true, nullptr);
            promise.set_value(*disk);
            return finish(*disk, true);
        }
        CachedValue v = fresh();
        store_disk_cache(key, model, prompt, max_tokens, temperature, v);
        record(model, prompt, temperature, max_tokens, &v, false, nullptr);
        promise.set_value(v);
        return finish(v, false);
    } catch (...) {
        {
            std::lock_guard lock(cache_mu_);
            cache_.erase(key);
        }
        promise.set_exception(std::current_exception());
        throw;
    }
}

std::vector<BatchResult> Gateway::complete_batch(std::span<const Request> requests) {
    std::vector<BatchResult> results(requests.size());
    parallel_for(requests.size(), [&](std::size_t i) {
        try {
            results[i].completion = complete(requests[i]);
        } catch (const BackendError& e) {
            results[i].error = e;
        }
    });
    return results;
}

void Gateway::parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) const {
    if (n == 0) return;
    std::vector<std::exception_ptr> errors(n);
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(settings_.concurrency));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace xlprobe::gateway
