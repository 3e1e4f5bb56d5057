#ifndef ADAMFLOW_CSV_HPP
#define ADAMFLOW_CSV_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace adamflow {

// Minimal CSV emitter with deterministic number formatting: doubles are
// written with shortest round-trip precision (%.17g), so identical runs
// produce byte-identical files.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(const std::vector<std::string>& names);
    CsvWriter& col(double v);
    CsvWriter& col(std::uint64_t v);
    CsvWriter& col(std::int64_t v);
    CsvWriter& col(int v) { return col(static_cast<std::int64_t>(v)); }
    CsvWriter& col(bool v);
    CsvWriter& col(const std::string& v);
    void end_row();

    static std::string format_double(double v);

private:
    std::ostream& out_;
    bool row_open_ = false;
};

// Parses a CSV file of numbers with a single header row.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};
CsvTable read_numeric_csv(std::istream& in);

}  // namespace adamflow

#endif
