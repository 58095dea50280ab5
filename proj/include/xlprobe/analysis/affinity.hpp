#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xlprobe/analysis/matrix.hpp"
#include "xlprobe/analysis/tables.hpp"

namespace xlprobe::analysis {

/// Relative Affinity Score table. Rows are evaluation languages (x), columns
/// seed languages (y):
///   D[x][y] = ((A[x][y] - mean_x) / mean_x) * exp(c * |mean_y - mean_x|)
/// where mean_x is the mean of row x. Lower values mean closer languages.
struct AffinityMatrix {
    std::vector<std::string> languages;
    DenseMatrix accuracy;
    std::vector<double> row_mean;
    std::vector<std::vector<std::optional<double>>> ras;  // nullopt where mean_x == 0
    double c = -1.0;

    Table to_table(const std::string& run_id) const;
};

/// Throws InvariantError for a non-square matrix, entries outside [0, 1] or
/// c >= 0.
AffinityMatrix compute_affinity(std::vector<std::string> languages, const DenseMatrix& accuracy, double c);

/// Reads long-format rows (eval_language, seed_language, accuracy).
std::pair<std::vector<std::string>, DenseMatrix> accuracy_from_table(const Table& t);

}  // namespace xlprobe::analysis
