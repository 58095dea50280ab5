#include "xlprobe/search/simulate.hpp"

#include <algorithm>

#include "xlprobe/gateway/errors.hpp"
#include "xlprobe/search/score.hpp"

namespace xlprobe::search {

Roster Roster::from(const std::vector<ModelSpec>& models, std::span<const Role> required) {
    auto first_with = [&](Role r) -> const ModelSpec* {
        for (const auto& m : models)
            if (m.has_role(r)) return &m;
        return nullptr;
    };
    for (Role r : required)
        if (!first_with(r)) throw ConfigError("model roster has no model with role '" + std::string(to_string(r)) + "'");

    Roster roster;
    if (auto* m = first_with(Role::proxy)) roster.proxy = *m;
    if (auto* m = first_with(Role::translator)) roster.translator = *m;
    roster.fragment_translator = roster.translator;
    if (auto* m = first_with(Role::judge)) roster.judge = *m;
    for (const auto& m : models) {
        if (m.has_role(Role::simulator)) roster.simulators.push_back(m);
        if (m.has_role(Role::target)) roster.targets.push_back(m);
    }
    return roster;
}

Roster Roster::for_search(const std::vector<ModelSpec>& models) {
    static constexpr Role kRequired[] = {Role::proxy, Role::translator, Role::judge, Role::simulator};
    return from(models, kRequired);
}

SimulationResult make_result(std::string pair_id, std::vector<std::string> models, std::vector<bool> english_correct,
                             std::vector<bool> target_correct, double gamma) {
    SimulationResult r;
    r.pair_id = std::move(pair_id);
    r.models = std::move(models);
    const auto k = static_cast<double>(english_correct.size());
    r.english_mean = static_cast<double>(std::count(english_correct.begin(), english_correct.end(), true)) / k;
    r.target_mean = static_cast<double>(std::count(target_correct.begin(), target_correct.end(), true)) / k;
    r.english_correct = std::move(english_correct);
    r.target_correct = std::move(target_correct);
    r.gamma = gamma;
    r.score = score(r.english_mean, r.target_mean, gamma);
    r.validate();
    return r;
}

std::vector<SimulationOutcome> simulate_many(const ling::Linguist& linguist, std::span<const BilingualPair> pairs,
                                             std::span<const ModelSpec> simulators, const ModelSpec& judge,
                                             double gamma) {
    if (simulators.empty()) throw ConfigError("simulation needs at least one simulator model");
    for (const auto& m : simulators)
        if (!m.has_role(Role::simulator)) throw ConfigError("model '" + m.name + "' lacks the simulator role");

    const std::size_t k = simulators.size();
    const std::size_t per_pair = 2 * k;
    // Task t: pair t / per_pair, model (t % per_pair) / 2, side t % 2 (0 = English).
    std::vector<char> correct(pairs.size() * per_pair, 0);
    std::vector<std::string> failure(pairs.size() * per_pair);

    linguist.gateway().parallel_for(pairs.size() * per_pair, [&](std::size_t t) {
        const auto& pair = pairs[t / per_pair];
        const auto& model = simulators[(t % per_pair) / 2];
        const auto& q = (t % 2 == 0) ? pair.english : pair.target;
        try {
            const std::string raw = linguist.answer_question(model, q);
            const int chosen = linguist.extract_answer(judge, q, raw);
            correct[t] = chosen == q.answer_index ? 1 : 0;
        } catch (const ling::UnextractableAnswer&) {
            correct[t] = 0;
        } catch (const InvariantError&) {
            correct[t] = 0;  // empty answer from the model
        } catch (const gateway::BackendError& e) {
            failure[t] = model.name + ": " + e.what();
        } catch (const ling::MissingTemplate& e) {
            failure[t] = e.what();
        }
    });

    std::vector<std::string> names;
    for (const auto& m : simulators) names.push_back(m.name);

    std::vector<SimulationOutcome> out(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        std::vector<bool> en, tg;
        std::string why;
        for (std::size_t j = 0; j < per_pair; ++j) {
            const std::size_t t = p * per_pair + j;
            if (!failure[t].empty() && why.empty()) why = failure[t];
            (j % 2 == 0 ? en : tg).push_back(correct[t] != 0);
        }
        if (!why.empty()) {
            out[p].failure = why;
            continue;
        }
        out[p].result = make_result(pairs[p].pair_id, names, std::move(en), std::move(tg), gamma);
    }
    return out;
}

SimulationResult simulate(const ling::Linguist& linguist, const BilingualPair& pair,
                          std::span<const ModelSpec> simulators, const ModelSpec& judge, double gamma) {
    auto outcome = simulate_many(linguist, std::span<const BilingualPair>(&pair, 1), simulators, judge, gamma);
    if (!outcome.front().result)
        throw UnscoredPair("pair " + pair.pair_id + " unscored: " + outcome.front().failure);
    return *outcome.front().result;
}

void require_answer_template(const ling::Linguist& linguist, const std::string& language) {
    if (!linguist.templates().has_exact(ling::TemplateId::answer_zero_shot, language))
        throw ling::MissingTemplate("no answer_zero_shot template for language '" + language +
                                    "'; create one with `xlprobe templates generate`");
}

}  // namespace xlprobe::search
