#include "spbench/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "spbench/errors.hpp"

namespace spbench {
namespace {

std::string escape(std::string_view s)
{
    if (s.find_first_of(",\"\n") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::string cell_text(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return escape(v);
            } else if constexpr (std::is_same_v<T, double>) {
                return format_double(v);
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else {
                return std::to_string(v);
            }
        },
        c);
}

nlohmann::ordered_json cell_json(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> nlohmann::ordered_json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) {
                    return nullptr;
                }
            }
            return v;
        },
        c);
}

std::vector<std::string> split_line(const std::string& line, std::size_t lineno)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) {
        throw ParseError(ParseErrorKind::bad_token, lineno, "unterminated quoted field");
    }
    out.push_back(std::move(cur));
    return out;
}

[[noreturn]] void bad_field(const CsvRow& row, std::string_view name, const std::string& text)
{
    throw ParseError(ParseErrorKind::bad_token, row.line,
                     "column " + std::string(name) + ": cannot parse '" + text + "'");
}

}  // namespace

std::optional<OutputFormat> parse_output_format(std::string_view name) noexcept
{
    if (name == "csv") {
        return OutputFormat::csv;
    }
    if (name == "json") {
        return OutputFormat::json;
    }
    return std::nullopt;
}

std::string format_double(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

void write_table(std::ostream& out, const Table& table, OutputFormat format,
                 const Protocol& protocol)
{
    if (format == OutputFormat::json) {
        nlohmann::ordered_json doc;
        doc["protocol"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : protocol) {
            doc["protocol"][k] = v;
        }
        doc["rows"] = nlohmann::ordered_json::array();
        for (const auto& row : table.rows) {
            nlohmann::ordered_json obj = nlohmann::ordered_json::object();
            for (std::size_t i = 0; i < table.columns.size(); ++i) {
                obj[table.columns[i]] = cell_json(row[i]);
            }
            doc["rows"].push_back(std::move(obj));
        }
        out << doc.dump(2) << '\n';
        return;
    }
    if (!protocol.empty()) {
        out << "# protocol:";
        for (const auto& [k, v] : protocol) {
            out << ' ' << k << '=' << v;
        }
        out << '\n';
    }
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out << (i ? "," : "") << escape(table.columns[i]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << cell_text(row[i]);
        }
        out << '\n';
    }
}

bool CsvDocument::has_column(std::string_view name) const
{
    for (const auto& h : header) {
        if (h == name) {
            return true;
        }
    }
    return false;
}

std::size_t CsvDocument::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw ParseError(ParseErrorKind::schema_mismatch, header_line,
                     "missing column " + std::string(name));
}

void CsvDocument::require(std::span<const std::string_view> columns) const
{
    for (auto c : columns) {
        column(c);
    }
}

CsvDocument read_csv(std::istream& in)
{
    CsvDocument doc;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto fields = split_line(line, lineno);
        if (!have_header) {
            doc.header = std::move(fields);
            doc.header_line = lineno;
            have_header = true;
            continue;
        }
        if (fields.size() != doc.header.size()) {
            throw ParseError(ParseErrorKind::bad_token, lineno,
                             "expected " + std::to_string(doc.header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
        }
        doc.rows.push_back({lineno, std::move(fields)});
    }
    if (in.bad()) {
        throw ParseError(ParseErrorKind::io, lineno, "read failed");
    }
    if (!have_header) {
        throw ParseError(ParseErrorKind::schema_mismatch, lineno, "no header row");
    }
    return doc;
}

CsvDocument read_csv_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(ParseErrorKind::io, 0, "cannot open " + path);
    }
    return read_csv(in);
}

double parse_double_field(const CsvRow& row, std::size_t col, std::string_view name)
{
    const auto& text = row.fields[col];
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc() || res.ptr != end) {
        bad_field(row, name, text);
    }
    return v;
}

std::uint64_t parse_count_field(const CsvRow& row, std::size_t col, std::string_view name)
{
    const auto& text = row.fields[col];
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc() || res.ptr != end) {
        bad_field(row, name, text);
    }
    return v;
}

bool parse_bool_field(const CsvRow& row, std::size_t col, std::string_view name)
{
    const auto& text = row.fields[col];
    if (text == "true" || text == "1") {
        return true;
    }
    if (text == "false" || text == "0") {
        return false;
    }
    bad_field(row, name, text);
}

}  // namespace spbench
