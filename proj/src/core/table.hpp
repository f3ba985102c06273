#pragma once

#include <string>
#include <vector>

namespace pucci {

/// Plain named-column table of doubles, the carrier for sweep results.
/// The CSV form starts with one comment line mapping each column to the
/// quantity it holds, then the header row, then the data.
struct Table {
    std::vector<std::string> names;
    std::vector<std::string> notes;  // same length as names; may hold empties
    std::vector<std::vector<double>> rows;

    std::size_t cols() const { return names.size(); }
    void add_column(std::string name, std::string note = "");
    void add_row(std::vector<double> row);
    double cell(std::size_t row, std::size_t col) const;
    std::size_t column(const std::string& name) const;  // throws if absent

    void write_csv(const std::string& path) const;
    std::string csv() const;
};

}  // namespace pucci
