#ifndef RARESUB_CSV_HPP
#define RARESUB_CSV_HPP

#include <string>
#include <string_view>
#include <vector>

namespace raresub::csv {

// Parsed CSV document: rows of string fields, RFC-4180 rules
// (quoted fields, "" escapes, CRLF or LF line ends).
struct Table {
    std::vector<std::vector<std::string>> rows;
};

Table read_file(const std::string& path);
Table parse(std::string_view text);

// Field quoting on demand; numbers are written with std::to_chars shortest
// round-trip form so save/load reproduces doubles exactly.
std::string escape_field(std::string_view field);
std::string format_double(double value);

// Parses with std::from_chars after trimming blanks; throws NonNumericCell
// carrying the (row, col) position given by the caller.
double parse_double(std::string_view field, std::size_t row, std::size_t col);

// Wide numeric matrices (first column = row id, remaining columns numeric).
// Parses cells in place without materializing per-cell strings, which
// matters for genome-scale inputs.
struct NumericTable {
    std::vector<std::string> header;  // includes the id column name
    std::vector<std::string> row_ids;
    std::vector<std::vector<double>> rows;  // one vector per data row
};

NumericTable read_numeric_file(const std::string& path);

void write_file(const std::string& path, const std::string& content);

}  // namespace raresub::csv

#endif
