#include "raresub/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "raresub/error.hpp"

namespace raresub::csv {

Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::MissingFile, "cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw Error(ErrorCode::IoFailure, "read failed for '" + path + "'");
    }
    return parse(buf.str());
}

Table parse(std::string_view text) {
    Table table;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;

    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                } else {
                    in_quotes = false;
                    ++i;
                }
            } else {
                field.push_back(c);
                ++i;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                row_started = true;
                ++i;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                row_started = true;
                ++i;
                break;
            case '\r':
                ++i;
                break;
            case '\n':
                if (row_started || !field.empty() || !row.empty()) {
                    row.push_back(std::move(field));
                    field.clear();
                    table.rows.push_back(std::move(row));
                    row.clear();
                }
                row_started = false;
                ++i;
                break;
            default:
                field.push_back(c);
                row_started = true;
                ++i;
                break;
        }
    }
    if (in_quotes) {
        throw Error(ErrorCode::MalformedHeader, "unterminated quoted field");
    }
    if (row_started || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string escape_field(std::string_view field) {
    bool needs_quotes = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        return std::string(buf);
    }
    return std::string(buf, ptr);
}

double parse_double(std::string_view field, std::size_t row, std::size_t col) {
    std::size_t begin = 0;
    std::size_t end = field.size();
    while (begin < end && (field[begin] == ' ' || field[begin] == '\t')) ++begin;
    while (end > begin && (field[end - 1] == ' ' || field[end - 1] == '\t')) --end;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data() + begin, field.data() + end, value);
    if (ec != std::errc() || ptr != field.data() + end || begin == end) {
        throw Error(ErrorCode::NonNumericCell,
                    "row " + std::to_string(row) + ", col " + std::to_string(col) + ": '" +
                        std::string(field) + "'");
    }
    return value;
}

namespace {

// one CSV field starting at text[pos]; returns the field and leaves pos on
// the delimiter (',' or '\n') or text.size()
std::string take_field(std::string_view text, std::size_t& pos) {
    std::string field;
    if (pos < text.size() && text[pos] == '"') {
        ++pos;
        while (pos < text.size()) {
            if (text[pos] == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field.push_back('"');
                    pos += 2;
                } else {
                    ++pos;
                    break;
                }
            } else {
                field.push_back(text[pos++]);
            }
        }
        return field;
    }
    while (pos < text.size() && text[pos] != ',' && text[pos] != '\n' && text[pos] != '\r') {
        field.push_back(text[pos++]);
    }
    return field;
}

}  // namespace

NumericTable read_numeric_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::MissingFile, "cannot open '" + path + "'");
    }
    std::string text;
    in.seekg(0, std::ios::end);
    text.resize(static_cast<std::size_t>(in.tellg()));
    in.seekg(0);
    in.read(text.data(), static_cast<std::streamsize>(text.size()));
    if (in.bad()) {
        throw Error(ErrorCode::IoFailure, "read failed for '" + path + "'");
    }

    NumericTable table;
    std::size_t pos = 0;
    const std::size_t n = text.size();

    // header row via the quote-aware field reader
    while (pos < n && text[pos] != '\n') {
        table.header.push_back(take_field(text, pos));
        if (pos < n && text[pos] == '\r') ++pos;
        if (pos < n && text[pos] == ',') ++pos;
    }
    if (pos < n) ++pos;  // consume newline
    if (table.header.size() < 2) {
        throw Error(ErrorCode::MalformedHeader,
                    "data file '" + path + "' needs an id column and at least one gene");
    }
    const std::size_t n_cols = table.header.size() - 1;

    std::size_t row_index = 1;
    while (pos < n) {
        if (text[pos] == '\n' || text[pos] == '\r') {  // blank line
            ++pos;
            continue;
        }
        table.row_ids.push_back(take_field(text, pos));
        std::vector<double> row;
        row.reserve(n_cols);
        while (pos < n && text[pos] == ',') {
            ++pos;
            if (pos < n && text[pos] == '"') {  // quoted numeric cell
                const std::string cell = take_field(text, pos);
                row.push_back(parse_double(cell, row_index, row.size() + 1));
                continue;
            }
            std::size_t end = pos;
            while (end < n && text[end] != ',' && text[end] != '\n' && text[end] != '\r') {
                ++end;
            }
            row.push_back(parse_double(std::string_view(text).substr(pos, end - pos), row_index,
                                       row.size() + 1));
            pos = end;
        }
        while (pos < n && (text[pos] == '\r' || text[pos] == '\n')) {
            if (text[pos] == '\n') {
                ++pos;
                break;
            }
            ++pos;
        }
        if (row.size() != n_cols) {
            throw Error(ErrorCode::MalformedHeader,
                        "data row " + std::to_string(row_index) + " has " +
                            std::to_string(row.size() + 1) + " fields, expected " +
                            std::to_string(n_cols + 1));
        }
        table.rows.push_back(std::move(row));
        ++row_index;
    }
    return table;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw Error(ErrorCode::IoFailure, "write failed for '" + path + "'");
    }
}

}  // namespace raresub::csv
