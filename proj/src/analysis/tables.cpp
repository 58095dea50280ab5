#include "xlprobe/analysis/tables.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "xlprobe/core/errors.hpp"
#include "xlprobe/core/records.hpp"

namespace xlprobe::analysis {

void Table::add(std::vector<std::string> row) {
    if (row.size() != header.size())
        throw InvariantError("row", "has " + std::to_string(row.size()) + " fields, header has " +
                                        std::to_string(header.size()));
    // Free text (error messages, reasons) must not break the row structure.
    for (auto& cell : row)
        std::replace_if(cell.begin(), cell.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
    rows.push_back(std::move(row));
}

std::string Table::to_tsv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += '\t';
            out += fields[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

void Table::save(const std::filesystem::path& path) const { write_text_file(path, to_tsv()); }

std::string format_number(double v) {
    if (std::isnan(v)) return "NA";
    if (v == 0.0) return "0";  // folds -0
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Table load_tsv(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    Table t;
    std::string line;
    std::size_t n = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            auto tab = s.find('\t', start);
            f.push_back(s.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        return f;
    };
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (t.header.empty()) {
            t.header = split(line);
            continue;
        }
        auto fields = split(line);
        if (fields.size() != t.header.size())
            throw ParseError(n, "expected " + std::to_string(t.header.size()) + " fields");
        t.rows.push_back(std::move(fields));
    }
    if (t.header.empty()) throw ParseError(1, "missing header row");
    return t;
}

}  // namespace xlprobe::analysis
