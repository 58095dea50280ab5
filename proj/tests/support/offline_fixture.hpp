#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xlprobe/core/config.hpp"
#include "xlprobe/gateway/gateway.hpp"
#include "xlprobe/harness/offline.hpp"
#include "xlprobe/linguistics/linguist.hpp"
#include "xlprobe/linguistics/templates.hpp"
#include "xlprobe/search/seeding.hpp"
#include "xlprobe/search/simulate.hpp"

namespace xlprobe::testing {

// Scripted offline stack: harness backends, gateway, templates, linguist, roster.
struct OfflineFixture {
    harness::OfflineHarness harness;
    ling::TemplateRegistry templates = ling::TemplateRegistry::builtin();
    SearchConfig config;
    gateway::Gateway gw;
    ling::Linguist linguist;
    std::vector<ModelSpec> models;
    search::Roster roster;

    explicit OfflineFixture(harness::ScenarioOptions options = {}, SearchConfig search = {},
                            GatewaySettings settings = {},
                            const std::function<void(std::vector<ModelSpec>&)>& edit_models = nullptr)
        : harness(std::move(options)),
          config(search),
          gw(settings, gateway::Mode::offline),
          linguist(gw, templates, ling::GenerationSettings::from(search)),
          models(edited(harness.roster(), edit_models)),
          roster(search::Roster::for_search(models)) {
        harness.install(gw);
    }

    static std::vector<ModelSpec> edited(std::vector<ModelSpec> models,
                                         const std::function<void(std::vector<ModelSpec>&)>& edit) {
        if (edit) edit(models);
        return models;
    }

    // Seeds every question into `language`; throws if any is dropped.
    std::vector<BilingualPair> seed(const std::vector<QuestionRecord>& questions, const std::string& language) {
        harness.add_questions(questions);
        auto out = search::seed_pairs(linguist, questions, language, roster);
        if (!out.dropped.empty())
            throw std::runtime_error("seeding dropped " + out.dropped.front().question_id + ": " +
                                     out.dropped.front().reason);
        return out.pairs;
    }
};

}  // namespace xlprobe::testing
