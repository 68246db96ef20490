#include "spbench/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include "spbench/errors.hpp"

namespace spbench {
namespace {

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) {
            ++pos;
        }
        const auto start = pos;
        while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) {
            ++pos;
        }
        if (pos > start) {
            out.push_back(line.substr(start, pos - start));
        }
    }
    return out;
}

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_skippable(std::string_view line)
{
    for (char c : line) {
        if (c == '%') {
            return true;
        }
        if (!std::isspace(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true;
}

std::optional<index_t> parse_index(std::string_view tok)
{
    index_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        return std::nullopt;
    }
    return v;
}

std::optional<double> parse_value(std::string_view tok)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        return std::nullopt;
    }
    return v;
}

MatrixHeader parse_banner(const std::string& line)
{
    const auto tokens = split_ws(line);
    if (tokens.empty() || lower(tokens[0]) != "%%matrixmarket") {
        throw ParseError(ParseErrorKind::bad_banner, 1,
                         "expected '%%MatrixMarket' banner");
    }
    if (tokens.size() != 5) {
        throw ParseError(ParseErrorKind::bad_banner, 1,
                         "banner needs object, format, field and symmetry");
    }
    const auto object = lower(tokens[1]);
    const auto format = lower(tokens[2]);
    const auto field = lower(tokens[3]);
    const auto symmetry = lower(tokens[4]);
    if (object != "matrix") {
        throw ParseError(ParseErrorKind::unsupported_header, 1,
                         "unsupported object '" + object + "'");
    }
    if (format != "coordinate") {
        throw ParseError(ParseErrorKind::unsupported_header, 1,
                         "unsupported format '" + format + "'");
    }
    MatrixHeader h;
    if (field == "real" || field == "double") {
        h.field = MmField::real;
    } else if (field == "integer") {
        h.field = MmField::integer;
    } else if (field == "pattern") {
        h.field = MmField::pattern;
    } else {
        throw ParseError(ParseErrorKind::unsupported_header, 1,
                         "unsupported field '" + field + "'");
    }
    if (symmetry == "general") {
        h.symmetry = MmSymmetry::general;
    } else if (symmetry == "symmetric") {
        h.symmetry = MmSymmetry::symmetric;
    } else {
        throw ParseError(ParseErrorKind::unsupported_header, 1,
                         "unsupported symmetry '" + symmetry + "'");
    }
    return h;
}

}  // namespace

MatrixMarket read_matrix_market(std::istream& in)
{
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) {
        throw ParseError(ParseErrorKind::bad_banner, 1, "empty input");
    }
    MatrixMarket out;
    out.header = parse_banner(line);

    index_t rows = 0;
    index_t cols = 0;
    index_t declared = 0;
    bool have_size = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_skippable(line)) {
            continue;
        }
        const auto tok = split_ws(line);
        const auto r = tok.size() == 3 ? parse_index(tok[0]) : std::nullopt;
        const auto c = tok.size() == 3 ? parse_index(tok[1]) : std::nullopt;
        const auto n = tok.size() == 3 ? parse_index(tok[2]) : std::nullopt;
        if (!r || !c || !n) {
            throw ParseError(ParseErrorKind::bad_size_line, line_no,
                             "expected '<rows> <cols> <entries>'");
        }
        rows = *r;
        cols = *c;
        declared = *n;
        have_size = true;
        break;
    }
    if (!have_size) {
        throw ParseError(ParseErrorKind::truncated, line_no, "missing size line");
    }

    const bool pattern = out.header.field == MmField::pattern;
    const bool symmetric = out.header.symmetry == MmSymmetry::symmetric;
    const std::size_t want_tokens = pattern ? 2 : 3;
    std::vector<Triplet> entries;
    entries.reserve(symmetric ? 2 * declared : declared);
    index_t seen = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_skippable(line)) {
            continue;
        }
        if (seen == declared) {
            throw ParseError(ParseErrorKind::count_mismatch, line_no,
                             "more entries than the declared " +
                                 std::to_string(declared));
        }
        const auto tok = split_ws(line);
        if (tok.size() < want_tokens) {
            throw ParseError(ParseErrorKind::truncated, line_no, "incomplete entry");
        }
        if (tok.size() > want_tokens) {
            throw ParseError(ParseErrorKind::bad_token, line_no,
                             "unexpected token '" + std::string(tok[want_tokens]) + "'");
        }
        const auto i = parse_index(tok[0]);
        const auto j = parse_index(tok[1]);
        if (!i || !j) {
            throw ParseError(ParseErrorKind::bad_token, line_no,
                             "malformed index in '" + line + "'");
        }
        double value = 1.0;
        if (!pattern) {
            const auto v = parse_value(tok[2]);
            if (!v) {
                throw ParseError(ParseErrorKind::bad_token, line_no,
                                 "malformed value '" + std::string(tok[2]) + "'");
            }
            value = *v;
        }
        if (*i < 1 || *i > rows || *j < 1 || *j > cols) {
            throw ParseError(ParseErrorKind::index_out_of_bounds, line_no,
                             "entry (" + std::to_string(*i) + ", " +
                                 std::to_string(*j) + ") outside " +
                                 std::to_string(rows) + "x" + std::to_string(cols));
        }
        entries.push_back({*i - 1, *j - 1, value});
        if (symmetric && *i != *j) {
            entries.push_back({*j - 1, *i - 1, value});
        }
        ++seen;
    }
    if (in.bad()) {
        throw ParseError(ParseErrorKind::io, line_no, "stream read failure");
    }
    if (seen < declared) {
        throw ParseError(ParseErrorKind::truncated, line_no,
                         "found " + std::to_string(seen) + " of " +
                             std::to_string(declared) + " declared entries");
    }
    out.matrix = coo_from_triplets(std::move(entries), rows, cols);
    return out;
}

MatrixMarket read_matrix_market_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(ParseErrorKind::io, 0, "cannot open " + path.string());
    }
    return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const CooMatrix& m)
{
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.dims.num_rows << ' ' << m.dims.num_cols << ' ' << m.dims.nnz << '\n';
    char buf[64];
    for (index_t k = 0; k < m.dims.nnz; ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", m.values[k]);
        out << m.row_idx[k] + 1 << ' ' << m.col_idx[k] + 1 << ' ' << buf << '\n';
    }
}

CorpusScan scan_corpus(const std::filesystem::path& dir, std::size_t workers)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::directory_iterator it(dir, ec);
    if (ec) {
        throw Error("cannot read corpus directory " + dir.string() + ": " +
                    ec.message());
    }
    std::vector<fs::path> files;
    for (const auto& e : it) {
        if (e.is_regular_file() && e.path().extension() == ".mtx") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename() < b.filename();
    });

    const auto count = static_cast<std::ptrdiff_t>(files.size());
    std::vector<std::optional<CorpusEntry>> parsed(files.size());
    std::vector<std::string> failures(files.size());
#pragma omp parallel for schedule(dynamic) num_threads(static_cast<int>(std::max<std::size_t>(workers, 1)))
    for (std::ptrdiff_t f = 0; f < count; ++f) {
        try {
            auto mm = read_matrix_market_file(files[f]);
            const auto csr = coo_to_csr(mm.matrix);
            parsed[f] = CorpusEntry{files[f].stem().string(), files[f], mm.header,
                                    csr.dims, row_nnz_stats(csr)};
        } catch (const std::exception& ex) {
            failures[f] = ex.what();
        }
    }

    CorpusScan scan;
    for (std::size_t f = 0; f < files.size(); ++f) {
        if (parsed[f]) {
            scan.entries.push_back(std::move(*parsed[f]));
        } else {
            scan.skipped.push_back({files[f], failures[f]});
        }
    }
    return scan;
}

CsrMatrix gen_laplacian_2d(index_t n)
{
    if (n == 0) {
        throw InvalidArgument("grid size must be at least 1");
    }
    const auto size = n * n;
    CsrMatrix m;
    m.row_ptr.reserve(size + 1);
    m.row_ptr.push_back(0);
    for (index_t gy = 0; gy < n; ++gy) {
        for (index_t gx = 0; gx < n; ++gx) {
            const auto row = gy * n + gx;
            auto add = [&](index_t col, double v) {
                m.col_idx.push_back(col);
                m.values.push_back(v);
            };
            if (gy > 0) add(row - n, -1.0);
            if (gx > 0) add(row - 1, -1.0);
            add(row, 4.0);
            if (gx + 1 < n) add(row + 1, -1.0);
            if (gy + 1 < n) add(row + n, -1.0);
            m.row_ptr.push_back(m.col_idx.size());
        }
    }
    m.dims = {size, size, static_cast<index_t>(m.values.size())};
    return m;
}

CsrMatrix gen_random_rowdist(index_t num_rows, index_t num_cols,
                             std::span<const index_t> row_nnz, std::uint64_t seed)
{
    if (row_nnz.size() != num_rows) {
        throw InvalidArgument("row_nnz has " + std::to_string(row_nnz.size()) +
                              " entries for " + std::to_string(num_rows) + " rows");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> value_dist(-1.0, 1.0);

    CsrMatrix m;
    m.row_ptr.assign(num_rows + 1, 0);
    std::vector<index_t> cols;
    std::unordered_set<index_t> chosen;
    for (index_t i = 0; i < num_rows; ++i) {
        const auto k = row_nnz[i];
        if (k > num_cols) {
            throw InvalidArgument("row " + std::to_string(i) + " requests " +
                                  std::to_string(k) + " entries but only " +
                                  std::to_string(num_cols) + " columns exist");
        }
        // Floyd's sampling: k distinct columns from [0, num_cols).
        chosen.clear();
        cols.clear();
        for (auto j = num_cols - k; j < num_cols; ++j) {
            const auto t = std::uniform_int_distribution<index_t>(0, j)(rng);
            const auto pick = chosen.insert(t).second ? t : j;
            if (pick == j) {
                chosen.insert(j);
            }
            cols.push_back(pick);
        }
        std::sort(cols.begin(), cols.end());
        for (auto c : cols) {
            double v = value_dist(rng);
            while (v == -1.0) {
                v = value_dist(rng);
            }
            m.col_idx.push_back(c);
            m.values.push_back(v);
        }
        m.row_ptr[i + 1] = m.col_idx.size();
    }
    m.dims = {num_rows, num_cols, static_cast<index_t>(m.values.size())};
    return m;
}

}  // namespace spbench
