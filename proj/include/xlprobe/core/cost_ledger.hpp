#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace xlprobe {

struct TokenCounts {
    std::int64_t prompt = 0;
    std::int64_t completion = 0;
    // Portions of the above that were estimated rather than reported by the backend.
    std::int64_t approx_prompt = 0;
    std::int64_t approx_completion = 0;
    std::int64_t calls = 0;

    TokenCounts& operator+=(const TokenCounts& o);
    TokenCounts operator-(const TokenCounts& o) const;
    bool operator==(const TokenCounts&) const = default;
};

struct Price {
    double prompt_per_1k = 0.0;
    double completion_per_1k = 0.0;
    bool operator==(const Price&) const = default;
};

using UsageByModel = std::map<std::string, TokenCounts>;

// Spend attributed to one (language, run) slice of work.
struct Attribution {
    UsageByModel usage;
    std::int64_t candidates = 0;
    bool operator==(const Attribution&) const = default;
};

/// Token and dollar accounting. Dollar figures are never stored: they are
/// always derived from token counts and the price table. Thread-safe.
class CostLedger {
public:
    CostLedger() = default;
    CostLedger(const CostLedger& other);
    CostLedger& operator=(const CostLedger& other);

    void set_price(const std::string& model, Price price);
    void record(const std::string& model, std::int64_t prompt_tokens, std::int64_t completion_tokens,
                bool approximate);
    // Adds pre-aggregated counts, e.g. when loading a saved ledger.
    void add_usage(const std::string& model, const TokenCounts& counts);
    void attribute(const std::string& language, const std::string& run_id, const UsageByModel& usage,
                   std::int64_t candidates);
    void merge(const CostLedger& other);

    UsageByModel usage() const;
    std::map<std::string, Price> prices() const;
    // language -> run_id -> attribution
    std::map<std::string, std::map<std::string, Attribution>> attributions() const;

    double dollars_for(const UsageByModel& usage) const;
    double total_dollars() const;
    double language_dollars(const std::string& language) const;
    std::int64_t language_candidates(const std::string& language) const;

    void validate() const;
    bool operator==(const CostLedger& other) const;

private:
    double dollars_locked(const UsageByModel& usage) const;

    mutable std::mutex mu_;
    UsageByModel usage_;
    std::map<std::string, Price> prices_;
    std::map<std::string, std::map<std::string, Attribution>> attributions_;
};

UsageByModel usage_delta(const UsageByModel& after, const UsageByModel& before);

}  // namespace xlprobe
