#include "adamflow/csv.hpp"

#include <cstdio>
#include <istream>
#include <sstream>

#include "adamflow/errors.hpp"

namespace adamflow {

void CsvWriter::header(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out_ << ',';
        out_ << names[i];
    }
    out_ << '\n';
}

std::string CsvWriter::format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter& CsvWriter::col(double v) {
    if (row_open_) out_ << ',';
    out_ << format_double(v);
    row_open_ = true;
    return *this;
}

CsvWriter& CsvWriter::col(std::uint64_t v) {
    if (row_open_) out_ << ',';
    out_ << v;
    row_open_ = true;
    return *this;
}

CsvWriter& CsvWriter::col(std::int64_t v) {
    if (row_open_) out_ << ',';
    out_ << v;
    row_open_ = true;
    return *this;
}

CsvWriter& CsvWriter::col(bool v) {
    if (row_open_) out_ << ',';
    out_ << (v ? 1 : 0);
    row_open_ = true;
    return *this;
}

CsvWriter& CsvWriter::col(const std::string& v) {
    if (row_open_) out_ << ',';
    out_ << v;
    row_open_ = true;
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    row_open_ = false;
}

CsvTable read_numeric_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) table.columns.push_back(cell);
    }
    if (table.columns.empty()) throw ValidationError("csv: empty header row");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(table.columns.size());
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(cell, &pos);
                if (pos != cell.size()) throw std::invalid_argument(cell);
                row.push_back(v);
            } catch (const std::exception&) {
                throw ValidationError("csv: line " + std::to_string(lineno) +
                                      ": not a number: '" + cell + "'");
            }
        }
        if (row.size() != table.columns.size())
            throw ValidationError("csv: line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(table.columns.size()) + " cells, got " +
                                  std::to_string(row.size()));
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace adamflow
