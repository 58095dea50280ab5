#include "xlprobe/core/cost_ledger.hpp"

#include <cmath>

#include "xlprobe/core/errors.hpp"

namespace xlprobe {

TokenCounts& TokenCounts::operator+=(const TokenCounts& o) {
    prompt += o.prompt;
    completion += o.completion;
    approx_prompt += o.approx_prompt;
    approx_completion += o.approx_completion;
    calls += o.calls;
    return *this;
}

TokenCounts TokenCounts::operator-(const TokenCounts& o) const {
    return {prompt - o.prompt, completion - o.completion, approx_prompt - o.approx_prompt,
            approx_completion - o.approx_completion, calls - o.calls};
}

CostLedger::CostLedger(const CostLedger& other) {
    std::lock_guard lock(other.mu_);
    usage_ = other.usage_;
    prices_ = other.prices_;
    attributions_ = other.attributions_;
}

CostLedger& CostLedger::operator=(const CostLedger& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mu_, other.mu_);
    usage_ = other.usage_;
    prices_ = other.prices_;
    attributions_ = other.attributions_;
    return *this;
}

void CostLedger::set_price(const std::string& model, Price price) {
    if (price.prompt_per_1k < 0.0 || price.completion_per_1k < 0.0)
        throw InvariantError("price_table", "negative price for '" + model + "'");
    std::lock_guard lock(mu_);
    prices_[model] = price;
}

void CostLedger::record(const std::string& model, std::int64_t prompt_tokens, std::int64_t completion_tokens,
                        bool approximate) {
    if (prompt_tokens < 0 || completion_tokens < 0) throw InvariantError("tokens", "negative token count");
    std::lock_guard lock(mu_);
    auto& u = usage_[model];
    u.prompt += prompt_tokens;
    u.completion += completion_tokens;
    if (approximate) {
        u.approx_prompt += prompt_tokens;
        u.approx_completion += completion_tokens;
    }
    u.calls += 1;
}

void CostLedger::add_usage(const std::string& model, const TokenCounts& counts) {
    if (counts.prompt < 0 || counts.completion < 0 || counts.approx_prompt < 0 || counts.approx_completion < 0 ||
        counts.calls < 0)
        throw InvariantError("usage." + model, "negative token count");
    std::lock_guard lock(mu_);
    usage_[model] += counts;
}

void CostLedger::attribute(const std::string& language, const std::string& run_id, const UsageByModel& usage,
                           std::int64_t candidates) {
    if (candidates < 0) throw InvariantError("candidates", "negative");
    std::lock_guard lock(mu_);
    auto& a = attributions_[language][run_id];
    for (const auto& [model, counts] : usage) a.usage[model] += counts;
    a.candidates += candidates;
}

void CostLedger::merge(const CostLedger& other) {
    if (this == &other) return;
    std::scoped_lock lock(mu_, other.mu_);
    for (const auto& [m, c] : other.usage_) usage_[m] += c;
    for (const auto& [m, p] : other.prices_) {
        auto [it, inserted] = prices_.emplace(m, p);
        if (!inserted && !(it->second == p))
            throw InvariantError("price_table", "conflicting prices for '" + m + "' while merging");
    }
    for (const auto& [lang, runs] : other.attributions_) {
        for (const auto& [run, a] : runs) {
            auto& dst = attributions_[lang][run];
            for (const auto& [m, c] : a.usage) dst.usage[m] += c;
            dst.candidates += a.candidates;
        }
    }
}

UsageByModel CostLedger::usage() const {
    std::lock_guard lock(mu_);
    return usage_;
}

std::map<std::string, Price> CostLedger::prices() const {
    std::lock_guard lock(mu_);
    return prices_;
}

std::map<std::string, std::map<std::string, Attribution>> CostLedger::attributions() const {
    std::lock_guard lock(mu_);
    return attributions_;
}

double CostLedger::dollars_locked(const UsageByModel& usage) const {
    double total = 0.0;
    for (const auto& [model, c] : usage) {
        auto it = prices_.find(model);
        if (it == prices_.end()) continue;  // unpriced models cost nothing
        total += static_cast<double>(c.prompt) / 1000.0 * it->second.prompt_per_1k +
                 static_cast<double>(c.completion) / 1000.0 * it->second.completion_per_1k;
    }
    return total;
}

double CostLedger::dollars_for(const UsageByModel& usage) const {
    std::lock_guard lock(mu_);
    return dollars_locked(usage);
}

double CostLedger::total_dollars() const {
    std::lock_guard lock(mu_);
    return dollars_locked(usage_);
}

double CostLedger::language_dollars(const std::string& language) const {
    std::lock_guard lock(mu_);
    auto it = attributions_.find(language);
    if (it == attributions_.end()) return 0.0;
    double total = 0.0;
    for (const auto& [run, a] : it->second) total += dollars_locked(a.usage);
    return total;
}

std::int64_t CostLedger::language_candidates(const std::string& language) const {
    std::lock_guard lock(mu_);
    auto it = attributions_.find(language);
    if (it == attributions_.end()) return 0;
    std::int64_t n = 0;
    for (const auto& [run, a] : it->second) n += a.candidates;
    return n;
}

void CostLedger::validate() const {
    std::lock_guard lock(mu_);
    const auto check = [](const std::string& where, const TokenCounts& c) {
        if (c.prompt < 0 || c.completion < 0 || c.approx_prompt < 0 || c.approx_completion < 0 || c.calls < 0)
            throw InvariantError(where, "negative token count");
        if (c.approx_prompt > c.prompt || c.approx_completion > c.completion)
            throw InvariantError(where, "approximate share exceeds total");
    };
    for (const auto& [m, c] : usage_) check("usage." + m, c);
    for (const auto& [m, p] : prices_)
        if (p.prompt_per_1k < 0.0 || p.completion_per_1k < 0.0)
            throw InvariantError("price_table." + m, "negative price");
    for (const auto& [lang, runs] : attributions_)
        for (const auto& [run, a] : runs) {
            if (a.candidates < 0) throw InvariantError("attributions." + lang + ".candidates", "negative");
            for (const auto& [m, c] : a.usage) check("attributions." + lang + "." + m, c);
        }
}

bool CostLedger::operator==(const CostLedger& other) const {
    if (this == &other) return true;
    std::scoped_lock lock(mu_, other.mu_);
    return usage_ == other.usage_ && prices_ == other.prices_ && attributions_ == other.attributions_;
}

UsageByModel usage_delta(const UsageByModel& after, const UsageByModel& before) {
    UsageByModel out;
    for (const auto& [m, c] : after) {
        auto it = before.find(m);
        TokenCounts d = it == before.end() ? c : c - it->second;
        if (!(d == TokenCounts{})) out[m] = d;
    }
    return out;
}

}  // namespace xlprobe
