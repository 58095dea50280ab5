#include "xlprobe/analysis/accuracy.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "xlprobe/gateway/errors.hpp"

namespace xlprobe::analysis {

double AccuracyRow::acc_en() const {
    return n_questions ? static_cast<double>(n_correct_en) / static_cast<double>(n_questions) : 0.0;
}

double AccuracyRow::acc_target() const {
    return n_questions ? static_cast<double>(n_correct_target) / static_cast<double>(n_questions) : 0.0;
}

void AccuracyTable::validate() const {
    for (const auto& r : rows) {
        if (r.n_questions <= 0) throw InvariantError("n_questions", "row without questions");
        if (r.n_correct_en < 0 || r.n_correct_en > r.n_questions)
            throw InvariantError("n_correct_en", "outside [0, n_questions]");
        if (r.n_correct_target < 0 || r.n_correct_target > r.n_questions)
            throw InvariantError("n_correct_target", "outside [0, n_questions]");
    }
}

Table AccuracyTable::to_table(const std::string& run_id) const {
    Table t;
    t.header = {"run_id",       "model",          "language", "origin_language", "n_questions", "n_correct_en",
                "n_correct_target", "acc_en", "acc_target", "drop"};
    if (rows.empty()) t.add({run_id, "no data", "", "", "0", "0", "0", "NA", "NA", "NA"});
    for (const auto& r : rows)
        t.add({run_id, r.model, r.language, r.origin_language, std::to_string(r.n_questions),
               std::to_string(r.n_correct_en), std::to_string(r.n_correct_target), format_number(r.acc_en()),
               format_number(r.acc_target()), format_number(r.drop())});
    return t;
}

AccuracyTable evaluate_pairs(const ling::Linguist& linguist, std::span<const BilingualPair> pairs,
                             std::span<const ModelSpec> models, const ModelSpec& judge, bool by_origin) {
    for (const auto& m : models)
        if (!m.has_role(Role::target)) throw ConfigError("model '" + m.name + "' lacks the target role");

    // Task t: pair t / (2M), model (t % 2M) / 2, side t % 2 (0 = English).
    const std::size_t per_pair = 2 * models.size();
    std::vector<char> correct(pairs.size() * per_pair, 0);
    std::vector<std::string> failure(pairs.size() * per_pair);
    linguist.gateway().parallel_for(pairs.size() * per_pair, [&](std::size_t t) {
        const auto& pair = pairs[t / per_pair];
        const auto& model = models[(t % per_pair) / 2];
        const auto& q = t % 2 == 0 ? pair.english : pair.target;
        try {
            const std::string raw = linguist.answer_question(model, q);
            correct[t] = linguist.extract_answer(judge, q, raw) == q.answer_index;
        } catch (const ling::UnextractableAnswer&) {
            correct[t] = 0;
        } catch (const InvariantError&) {
            correct[t] = 0;
        } catch (const gateway::BackendError& e) {
            failure[t] = e.what();
        } catch (const ling::MissingTemplate& e) {
            failure[t] = e.what();
        }
    });

    using Key = std::tuple<std::string, std::string, std::string>;
    std::map<Key, AccuracyRow> rows;
    AccuracyTable table;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        for (std::size_t m = 0; m < models.size(); ++m) {
            const std::size_t en = p * per_pair + 2 * m, tg = en + 1;
            if (!failure[en].empty() || !failure[tg].empty()) {
                table.excluded.push_back(models[m].name + "\t" + pairs[p].pair_id + "\t" +
                                         (failure[en].empty() ? failure[tg] : failure[en]));
                continue;
            }
            const std::string origin = by_origin ? pairs[p].origin_language.value_or(pairs[p].language()) : "";
            auto& row = rows[Key{models[m].name, pairs[p].language(), origin}];
            row.model = models[m].name;
            row.language = pairs[p].language();
            row.origin_language = origin;
            ++row.n_questions;
            row.n_correct_en += correct[en];
            row.n_correct_target += correct[tg];
        }
    }
    for (auto& [k, r] : rows) table.rows.push_back(std::move(r));
    table.validate();
    return table;
}

AccuracyTable evaluate_candidates(const ling::Linguist& linguist, std::span<const CandidateRecord> candidates,
                                  std::span<const ModelSpec> models, const ModelSpec& judge, bool by_origin) {
    std::vector<BilingualPair> pairs;
    pairs.reserve(candidates.size());
    for (const auto& c : candidates) pairs.push_back(c.pair);
    return evaluate_pairs(linguist, pairs, models, judge, by_origin);
}

DenseMatrix accuracy_matrix(const AccuracyTable& table, const std::vector<std::string>& languages) {
    const std::size_t n = languages.size();
    auto index = [&](const std::string& code) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < n; ++i)
            if (languages[i] == code) return i;
        return std::nullopt;
    };
    DenseMatrix questions(n, n), correct(n, n);
    for (const auto& r : table.rows) {
        if (r.origin_language.empty()) throw InvariantError("origin_language", "table is not grouped by origin");
        auto x = index(r.language), y = index(r.origin_language);
        if (!x || !y) continue;
        questions(*x, *y) += static_cast<double>(r.n_questions);
        correct(*x, *y) += static_cast<double>(r.n_correct_target);
    }
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n * n; ++i)
        a.data[i] = questions.data[i] > 0 ? correct.data[i] / questions.data[i]
                                          : std::numeric_limits<double>::quiet_NaN();
    return a;
}

}  // namespace xlprobe::analysis
