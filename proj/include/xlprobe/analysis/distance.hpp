#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xlprobe/analysis/matrix.hpp"
#include "xlprobe/analysis/tables.hpp"

namespace xlprobe::analysis {

struct Embedding {
    std::string id;
    std::vector<double> vector;
};

struct DistanceMatrix {
    std::vector<std::string> ids;
    DenseMatrix distance;

    Table to_table(const std::string& run_id) const;
};

/// Pairwise cosine distances of the L2-normalised vectors. Throws
/// InvariantError on mismatched dimensions or a zero vector (naming its id).
DistanceMatrix cosine_distance_matrix(std::span<const Embedding> embeddings);

// One {"id": ..., "vector": [...]} object per line.
std::vector<Embedding> load_embeddings(const std::filesystem::path& path);

}  // namespace xlprobe::analysis
