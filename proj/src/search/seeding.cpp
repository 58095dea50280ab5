#include "xlprobe/search/seeding.hpp"

#include <map>
#include <optional>
#include <random>

#include "xlprobe/core/errors.hpp"
#include "xlprobe/core/languages.hpp"
#include "xlprobe/gateway/errors.hpp"

namespace xlprobe::search {

std::vector<QuestionRecord> sample_equally(std::span<const QuestionRecord> source, std::size_t n,
                                           std::uint64_t seed) {
    std::map<SourceDataset, std::vector<QuestionRecord>> groups;
    for (const auto& q : source) groups[q.source_dataset].push_back(q);
    if (n > source.size()) {
        std::string counts;
        for (const auto& [d, qs] : groups)
            counts += (counts.empty() ? "" : ", ") + std::string(to_string(d)) + "=" + std::to_string(qs.size());
        throw ConfigError("requested " + std::to_string(n) + " seeds but the source has only " +
                          std::to_string(source.size()) + " (" + (counts.empty() ? "empty" : counts) + ")");
    }
    std::mt19937_64 rng(seed);
    for (auto& [d, qs] : groups)
        for (std::size_t i = qs.size(); i > 1; --i) std::swap(qs[i - 1], qs[rng() % i]);

    std::vector<QuestionRecord> out;
    std::size_t round = 0;
    while (out.size() < n) {
        for (auto& [d, qs] : groups) {
            if (out.size() == n) break;
            if (round < qs.size()) out.push_back(qs[round]);
        }
        ++round;
    }
    return out;
}

SeedingOutcome seed_pairs(const ling::Linguist& linguist, std::span<const QuestionRecord> questions,
                          const std::string& language, const Roster& roster) {
    require_target_language(language);
    std::vector<std::optional<BilingualPair>> made(questions.size());
    std::vector<std::string> reasons(questions.size());
    linguist.gateway().parallel_for(questions.size(), [&](std::size_t i) {
        try {
            LocalizedQuestion english = to_english_question(questions[i]);
            LocalizedQuestion target = linguist.translate_question(roster.translator, english, language);
            if (!linguist.semantic_check(roster.judge, english, target)) {
                reasons[i] = "translation failed the semantic check";
                return;
            }
            made[i] = make_seed_pair(questions[i].id, std::move(english), std::move(target));
        } catch (const gateway::BackendError& e) {
            reasons[i] = e.what();
        } catch (const ling::LinguisticsError& e) {
            reasons[i] = e.what();
        }
    });
    SeedingOutcome out;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        if (made[i]) out.pairs.push_back(std::move(*made[i]));
        else out.dropped.push_back({questions[i].id, reasons[i]});
    }
    return out;
}

}  // namespace xlprobe::search
