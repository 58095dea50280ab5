#include "xlprobe/analysis/expand.hpp"

#include <optional>
#include <set>

#include "xlprobe/core/languages.hpp"
#include "xlprobe/gateway/errors.hpp"

namespace xlprobe::analysis {

LocalizedQuestion base_question(const BilingualPair& pair) {
    LocalizedQuestion q = pair.english;
    for (auto it = pair.lineage.rbegin(); it != pair.lineage.rend(); ++it) {
        const std::string suffix = " " + it->english_fragment;
        if (q.text.size() <= suffix.size() || q.text.compare(q.text.size() - suffix.size(), suffix.size(), suffix) != 0)
            throw InvariantError("english.text", "pair " + pair.pair_id + " does not end with its lineage fragments");
        q.text.resize(q.text.size() - suffix.size());
    }
    return q;
}

ExpansionResult expand_candidates(const ling::Linguist& linguist, std::span<const BilingualPair> seeds,
                                  std::span<const std::string> languages, const ModelSpec& question_translator,
                                  const ModelSpec& fragment_translator) {
    for (const auto& l : languages) require_target_language(l);

    const std::size_t n = seeds.size() * languages.size();
    std::vector<std::optional<BilingualPair>> made(n);
    std::vector<std::string> why(n);
    linguist.gateway().parallel_for(n, [&](std::size_t t) {
        const BilingualPair& seed = seeds[t / languages.size()];
        const std::string& language = languages[t % languages.size()];
        try {
            const LocalizedQuestion base = base_question(seed);
            BilingualPair pair =
                make_seed_pair(seed.seed_id, base, linguist.translate_question(question_translator, base, language));
            pair.origin_language = seed.origin_language.value_or(seed.language());
            for (const auto& step : seed.lineage) {
                PerturbationStep s = step;
                s.target_fragment = linguist.translate_fragment(fragment_translator, step.english_fragment, language);
                pair = extend_pair(pair, s, ling::insert(pair.english, s.english_fragment),
                                   ling::insert(pair.target, s.target_fragment));
            }
            pair.validate();
            made[t] = std::move(pair);
        } catch (const gateway::BackendError& e) {
            why[t] = e.what();
        } catch (const ling::LinguisticsError& e) {
            why[t] = e.what();
        } catch (const InvariantError& e) {
            why[t] = e.what();
        }
    });

    ExpansionResult out;
    std::set<std::string> seen;
    for (std::size_t t = 0; t < n; ++t) {
        const std::string& seed_id = seeds[t / languages.size()].pair_id;
        const std::string& language = languages[t % languages.size()];
        if (!made[t]) {
            out.skipped.push_back({seed_id, language, why[t]});
        } else if (!seen.insert(made[t]->pair_id).second) {
            out.skipped.push_back({seed_id, language, "duplicate pair_id " + made[t]->pair_id});
        } else {
            out.pairs.push_back(std::move(*made[t]));
        }
    }
    return out;
}

}  // namespace xlprobe::analysis
