#include "core/table.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace pucci {

void Table::add_column(std::string name, std::string note) {
    names.push_back(std::move(name));
    notes.push_back(std::move(note));
}

void Table::add_row(std::vector<double> row) {
    if (row.size() != names.size()) fail_internal("table row width mismatch");
    rows.push_back(std::move(row));
}

double Table::cell(std::size_t row, std::size_t col) const {
    if (row >= rows.size() || col >= names.size()) fail_invalid("table cell out of range");
    return rows[row][col];
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    fail_invalid("table has no column '" + name + "'");
}

std::string Table::csv() const {
    std::ostringstream out;
    bool any_note = false;
    for (const auto& n : notes) any_note = any_note || !n.empty();
    if (any_note) {
        out << "#";
        bool first = true;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (notes[i].empty()) continue;
            out << (first ? " " : ", ") << names[i] << " = " << notes[i];
            first = false;
        }
        out << "\n";
    }
    for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
    out << "\n";
    char buf[64];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << "\n";
    }
    return out.str();
}

void Table::write_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) fail_invalid("cannot open '" + path + "' for writing");
    f << csv();
}

}  // namespace pucci
