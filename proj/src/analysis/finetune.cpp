#include "xlprobe/analysis/finetune.hpp"

#include <random>

#include <json.hpp>

#include "xlprobe/core/errors.hpp"
#include "xlprobe/linguistics/parsing.hpp"

namespace xlprobe::analysis {

FinetuneFormat parse_finetune_format(std::string_view s) {
    if (s == "sft") return FinetuneFormat::sft;
    if (s == "dpo") return FinetuneFormat::dpo;
    throw ConfigError("unknown fine-tune format '" + std::string(s) + "' (expected sft or dpo)");
}

std::vector<FinetuneRecord> export_finetune(std::span<const CandidateRecord> candidates, FinetuneFormat format,
                                            const ling::TemplateRegistry& templates, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<FinetuneRecord> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) {
        c.validate();
        const LocalizedQuestion& q = c.pair.target;
        FinetuneRecord r;
        r.pair_id = c.pair.pair_id;
        r.run_id = c.run_id;
        r.language = q.language;
        r.prompt = templates.get(ling::TemplateId::answer_zero_shot, q.language)
                       .render({{"question", q.text}, {"choices", ling::render_choices(q.choices)}});
        r.completion = q.correct_answer();
        if (format == FinetuneFormat::dpo) {
            const auto wrong = q.incorrect_indices();
            r.rejected = q.choices[static_cast<std::size_t>(wrong[rng() % wrong.size()])];
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::string finetune_jsonl(const std::vector<FinetuneRecord>& records, FinetuneFormat format) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["pair_id"] = r.pair_id;
        j["run_id"] = r.run_id;
        j["language"] = r.language;
        j["prompt"] = r.prompt;
        if (format == FinetuneFormat::sft) {
            j["completion"] = r.completion;
        } else {
            j["chosen"] = r.completion;
            j["rejected"] = r.rejected.value_or("");
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace xlprobe::analysis
