#include "xlprobe/analysis/affinity.hpp"

#include <cmath>
#include <map>
#include <set>

#include "xlprobe/core/errors.hpp"
#include "xlprobe/core/languages.hpp"

namespace xlprobe::analysis {

AffinityMatrix compute_affinity(std::vector<std::string> languages, const DenseMatrix& accuracy, double c) {
    if (!(c < 0.0)) throw InvariantError("affinity_constant", "must be negative");
    if (accuracy.rows != accuracy.cols || accuracy.rows != languages.size())
        throw InvariantError("accuracy", "must be square over the language list");
    for (double v : accuracy.data)
        if (!(v >= 0.0 && v <= 1.0)) throw InvariantError("accuracy", "entries must lie in [0, 1]");

    AffinityMatrix m;
    m.languages = std::move(languages);
    m.accuracy = accuracy;
    m.c = c;
    const DenseMatrix d = kernels::ras_parallel(accuracy, c, m.row_mean);
    m.ras.assign(d.rows, std::vector<std::optional<double>>(d.cols));
    for (std::size_t x = 0; x < d.rows; ++x)
        for (std::size_t y = 0; y < d.cols; ++y)
            if (!std::isnan(d(x, y))) m.ras[x][y] = d(x, y);
    return m;
}

Table AffinityMatrix::to_table(const std::string& run_id) const {
    Table t;
    t.header = {"run_id", "eval_language", "seed_language", "accuracy", "eval_row_mean", "seed_row_mean", "c", "ras"};
    for (std::size_t x = 0; x < languages.size(); ++x)
        for (std::size_t y = 0; y < languages.size(); ++y)
            t.add({run_id, languages[x], languages[y], format_number(accuracy(x, y)), format_number(row_mean[x]),
                   format_number(row_mean[y]), format_number(c), ras[x][y] ? format_number(*ras[x][y]) : "undefined"});
    return t;
}

std::pair<std::vector<std::string>, DenseMatrix> accuracy_from_table(const Table& t) {
    auto column = [&](const std::string& name) {
        for (std::size_t i = 0; i < t.header.size(); ++i)
            if (t.header[i] == name) return i;
        throw InvariantError(name, "missing column");
    };
    const auto cx = column("eval_language"), cy = column("seed_language"), ca = column("accuracy");
    std::set<std::string> codes;
    for (const auto& r : t.rows) {
        codes.insert(r[cx]);
        codes.insert(r[cy]);
    }
    // Keep the canonical language order so tables line up across runs.
    std::vector<std::string> languages;
    for (const auto& info : target_languages())
        if (codes.erase(std::string(info.code))) languages.emplace_back(info.code);
    if (!codes.empty()) throw InvariantError("language", "unsupported code '" + *codes.begin() + "'");

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < languages.size(); ++i) index[languages[i]] = i;
    DenseMatrix a(languages.size(), languages.size(), std::nan(""));
    for (const auto& r : t.rows) {
        if (r[ca] == "NA") continue;  // reported below as a missing cell
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(r[ca], &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != r[ca].size()) throw InvariantError("accuracy", "not a number: '" + r[ca] + "'");
        a(index[r[cx]], index[r[cy]]) = v;
    }
    for (std::size_t x = 0; x < a.rows; ++x)
        for (std::size_t y = 0; y < a.cols; ++y)
            if (std::isnan(a(x, y)))
                throw InvariantError("accuracy", "missing cell " + languages[x] + "/" + languages[y]);
    return {languages, a};
}

}  // namespace xlprobe::analysis
