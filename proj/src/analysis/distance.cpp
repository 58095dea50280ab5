#include "xlprobe/analysis/distance.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "xlprobe/core/errors.hpp"

namespace xlprobe::analysis {

DistanceMatrix cosine_distance_matrix(std::span<const Embedding> embeddings) {
    DistanceMatrix out;
    if (embeddings.empty()) return out;
    const std::size_t dim = embeddings.front().vector.size();
    if (dim == 0) throw InvariantError("vector", "embedding '" + embeddings.front().id + "' is empty");
    DenseMatrix v(embeddings.size(), dim);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        const auto& e = embeddings[i];
        if (!ids.insert(e.id).second) throw InvariantError("id", "duplicate embedding id '" + e.id + "'");
        if (e.vector.size() != dim)
            throw InvariantError("vector", "embedding '" + e.id + "' has dimension " + std::to_string(e.vector.size()) +
                                               ", expected " + std::to_string(dim));
        double norm = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            if (!std::isfinite(e.vector[k])) throw InvariantError("vector", "embedding '" + e.id + "' is not finite");
            v(i, k) = e.vector[k];
            norm += e.vector[k] * e.vector[k];
        }
        if (norm == 0.0) throw InvariantError("vector", "embedding '" + e.id + "' has zero norm");
        out.ids.push_back(e.id);
    }
    out.distance = kernels::cosine_distance_parallel(v);
    return out;
}

Table DistanceMatrix::to_table(const std::string& run_id) const {
    Table t;
    t.header = {"run_id", "id"};
    t.header.insert(t.header.end(), ids.begin(), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::vector<std::string> row{run_id, ids[i]};
        for (std::size_t j = 0; j < ids.size(); ++j) row.push_back(format_number(distance(i, j)));
        t.add(std::move(row));
    }
    return t;
}

std::vector<Embedding> load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<Embedding> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            out.push_back({j.at("id").get<std::string>(), j.at("vector").get<std::vector<double>>()});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(n, e.what());
        }
    }
    return out;
}

}  // namespace xlprobe::analysis
