#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xlprobe/core/types.hpp"
#include "xlprobe/linguistics/templates.hpp"

namespace xlprobe::analysis {

enum class FinetuneFormat { sft, dpo };

FinetuneFormat parse_finetune_format(std::string_view s);

struct FinetuneRecord {
    std::string pair_id;
    std::string run_id;
    std::string language;
    std::string prompt;      // target-language question in its answering template
    std::string completion;  // correct choice text
    std::optional<std::string> rejected;  // dpo only: one distractor text
};

/// One record per candidate (its target-language side). For dpo the
/// rejected answer is drawn uniformly from the distractors with a
/// mt19937_64 seeded by `seed`, in candidate order.
std::vector<FinetuneRecord> export_finetune(std::span<const CandidateRecord> candidates, FinetuneFormat format,
                                            const ling::TemplateRegistry& templates, std::uint64_t seed);

// sft lines: {"prompt","completion",...}; dpo lines: {"prompt","chosen","rejected",...}.
std::string finetune_jsonl(const std::vector<FinetuneRecord>& records, FinetuneFormat format);

}  // namespace xlprobe::analysis
