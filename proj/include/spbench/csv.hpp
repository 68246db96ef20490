#pragma once

/// @file csv.hpp
/// @brief Result tables: CSV/JSON writing and schema-checked CSV reading.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace spbench {

using Cell = std::variant<std::string, double, std::uint64_t, bool>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

enum class OutputFormat { csv, json };

std::optional<OutputFormat> parse_output_format(std::string_view name) noexcept;

/// Ordered key/value pairs describing how a table was produced.
using Protocol = std::vector<std::pair<std::string, std::string>>;

/// Shortest decimal form that reads back to the same double; "inf", "-inf"
/// and "nan" for non-finite values.
std::string format_double(double v);

/// CSV: an optional `# protocol: k=v ...` comment line, the header, then
/// one line per row. JSON: {"protocol": {...}, "rows": [{column: value}]}
/// with non-finite doubles as null.
void write_table(std::ostream& out, const Table& table, OutputFormat format,
                 const Protocol& protocol = {});

struct CsvRow {
    std::size_t line;
    std::vector<std::string> fields;
};

struct CsvDocument {
    std::vector<std::string> header;
    std::size_t header_line = 0;
    std::vector<CsvRow> rows;

    bool has_column(std::string_view name) const;
    /// Index of a column; throws ParseError(schema_mismatch) naming it.
    std::size_t column(std::string_view name) const;
    /// Throws ParseError(schema_mismatch) naming the first absent column.
    void require(std::span<const std::string_view> columns) const;
};

/// Reads a CSV stream. Blank lines and lines starting with '#' are skipped;
/// the first remaining line is the header. Double-quoted fields may contain
/// commas and doubled quotes. Throws ParseError with the line number when a
/// row's field count differs from the header, or when there is no header.
CsvDocument read_csv(std::istream& in);
CsvDocument read_csv_file(const std::string& path);

double parse_double_field(const CsvRow& row, std::size_t col, std::string_view name);
std::uint64_t parse_count_field(const CsvRow& row, std::size_t col, std::string_view name);
bool parse_bool_field(const CsvRow& row, std::size_t col, std::string_view name);

}  // namespace spbench
