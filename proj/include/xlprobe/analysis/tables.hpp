#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace xlprobe::analysis {

/// Tab-separated table with a header row.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row);
    std::string to_tsv() const;
    void save(const std::filesystem::path& path) const;
};

// Shortest decimal form that reads back to the same double.
std::string format_number(double v);

// Parses a TSV file with a header row; fields must not contain tabs.
Table load_tsv(const std::filesystem::path& path);

}  // namespace xlprobe::analysis
