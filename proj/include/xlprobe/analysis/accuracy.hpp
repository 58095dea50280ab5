#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xlprobe/core/model_spec.hpp"
#include "xlprobe/core/types.hpp"
#include "xlprobe/linguistics/linguist.hpp"
#include "xlprobe/analysis/matrix.hpp"
#include "xlprobe/analysis/tables.hpp"

namespace xlprobe::analysis {

struct AccuracyRow {
    std::string model;
    std::string language;
    // Seed language the pairs came from; empty unless grouped by origin.
    std::string origin_language;
    std::int64_t n_questions = 0;
    std::int64_t n_correct_en = 0;
    std::int64_t n_correct_target = 0;

    double acc_en() const;
    double acc_target() const;
    double drop() const { return acc_en() - acc_target(); }
};

struct AccuracyTable {
    std::vector<AccuracyRow> rows;  // sorted by (model, language, origin)
    std::vector<std::string> excluded;  // "<model>\t<pair_id>\t<reason>" for backend failures

    void validate() const;
    Table to_table(const std::string& run_id) const;
};

/// Each model answers both sides of every pair; rows aggregate per
/// (model, language[, origin language]). Pairs whose answers hit a backend
/// failure are left out of that model's denominators and listed.
AccuracyTable evaluate_pairs(const ling::Linguist& linguist, std::span<const BilingualPair> pairs,
                             std::span<const ModelSpec> models, const ModelSpec& judge, bool by_origin);

AccuracyTable evaluate_candidates(const ling::Linguist& linguist, std::span<const CandidateRecord> candidates,
                                  std::span<const ModelSpec> models, const ModelSpec& judge, bool by_origin);

/// A[x][y] = pooled target-side accuracy on evaluation language x over pairs
/// whose origin language is y. Cells with no questions are NaN.
DenseMatrix accuracy_matrix(const AccuracyTable& table, const std::vector<std::string>& languages);

}  // namespace xlprobe::analysis
