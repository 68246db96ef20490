#include "spbench/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spbench/errors.hpp"

namespace spbench {
namespace {

void require(bool cond, const char* what)
{
    if (!cond) {
        throw InvalidArgument(what);
    }
}

void validate_dims(const Dims& d)
{
    // Compare in floating point so huge dimensions cannot overflow.
    require(static_cast<double>(d.nnz) <=
                static_cast<double>(d.num_rows) * static_cast<double>(d.num_cols),
            "nnz exceeds num_rows * num_cols");
}

index_t pad_column(const CsrMatrix& m, index_t row)
{
    const auto len = m.row_nnz(row);
    return len == 0 ? 0 : m.col_idx[m.row_ptr[row + 1] - 1];
}

void check_padded_row(const std::vector<index_t>& cols,
                      const std::vector<double>& vals, index_t first,
                      index_t stride, index_t width, index_t len,
                      index_t num_cols)
{
    require(len <= width, "row length exceeds padded width");
    for (index_t k = 0; k < width; ++k) {
        const auto pos = first + k * stride;
        if (k < len) {
            require(cols[pos] < num_cols, "column index out of bounds");
            if (k > 0) {
                require(cols[pos - stride] < cols[pos],
                        "columns not strictly increasing within a row");
            }
        } else {
            require(vals[pos] == 0.0, "pad slot holds a nonzero value");
            const auto expect = len == 0 ? 0 : cols[first + (len - 1) * stride];
            require(cols[pos] == expect, "pad slot column does not follow policy");
        }
    }
}

}  // namespace

void CooMatrix::validate() const
{
    validate_dims(dims);
    require(row_idx.size() == dims.nnz && col_idx.size() == dims.nnz &&
                values.size() == dims.nnz,
            "COO array lengths differ from nnz");
    for (index_t k = 0; k < dims.nnz; ++k) {
        require(row_idx[k] < dims.num_rows && col_idx[k] < dims.num_cols,
                "COO index out of bounds");
        if (k > 0) {
            const bool ordered =
                row_idx[k - 1] < row_idx[k] ||
                (row_idx[k - 1] == row_idx[k] && col_idx[k - 1] < col_idx[k]);
            require(ordered, "COO entries not strictly sorted by (row, col)");
        }
    }
}

void CsrMatrix::validate() const
{
    validate_dims(dims);
    require(row_ptr.size() == dims.num_rows + 1, "row_ptr length is not num_rows + 1");
    require(row_ptr.front() == 0, "row_ptr[0] is not 0");
    require(row_ptr.back() == dims.nnz, "row_ptr[num_rows] is not nnz");
    require(col_idx.size() == dims.nnz && values.size() == dims.nnz,
            "CSR array lengths differ from nnz");
    for (index_t i = 0; i < dims.num_rows; ++i) {
        require(row_ptr[i] <= row_ptr[i + 1], "row_ptr decreases");
        for (auto k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            require(col_idx[k] < dims.num_cols, "CSR column index out of bounds");
            if (k > row_ptr[i]) {
                require(col_idx[k - 1] < col_idx[k],
                        "CSR columns not strictly increasing within a row");
            }
        }
    }
}

void EllMatrix::validate() const
{
    validate_dims(dims);
    const auto rows = dims.num_rows;
    require(col_idx.size() == rows * width && values.size() == rows * width,
            "ELL storage is not num_rows * width");
    require(row_len.size() == rows, "ELL row_len length is not num_rows");
    index_t real = 0;
    index_t widest = 0;
    for (index_t i = 0; i < rows; ++i) {
        check_padded_row(col_idx, values, i, rows, width, row_len[i], dims.num_cols);
        real += row_len[i];
        widest = std::max(widest, row_len[i]);
    }
    require(widest == width, "ELL width is not the longest row");
    require(real == dims.nnz, "ELL real entry count differs from nnz");
}

void SellMatrix::validate() const
{
    validate_dims(dims);
    require(slice_size >= 1, "slice_size must be positive");
    const auto slices = (dims.num_rows + slice_size - 1) / slice_size;
    require(slice_ptr.size() == slices + 1, "slice_ptr length mismatch");
    require(slice_ptr.front() == 0, "slice_ptr[0] is not 0");
    require(slice_ptr.back() == values.size() && col_idx.size() == values.size(),
            "slice_ptr end differs from packed length");
    require(row_len.size() == dims.num_rows, "SELL row_len length is not num_rows");
    index_t real = 0;
    for (index_t s = 0; s < slices; ++s) {
        require(slice_ptr[s] <= slice_ptr[s + 1], "slice_ptr decreases");
        require((slice_ptr[s + 1] - slice_ptr[s]) % slice_size == 0,
                "slice length is not a multiple of slice_size");
        const auto width = slice_width(s);
        index_t widest = 0;
        for (index_t local = 0; local < slice_size; ++local) {
            const auto row = s * slice_size + local;
            const auto len = row < dims.num_rows ? row_len[row] : 0;
            check_padded_row(col_idx, values, slice_ptr[s] + local, slice_size,
                             width, len, std::max<index_t>(dims.num_cols, 1));
            real += len;
            widest = std::max(widest, len);
        }
        require(widest == width, "slice width is not its longest row");
    }
    require(real == dims.nnz, "SELL real entry count differs from nnz");
}

void HybridMatrix::validate() const
{
    ell_part.validate();
    coo_part.validate();
    require(ell_part.dims.num_rows == dims.num_rows &&
                coo_part.dims.num_rows == dims.num_rows &&
                ell_part.dims.num_cols == dims.num_cols &&
                coo_part.dims.num_cols == dims.num_cols,
            "hybrid part dimensions differ");
    require(ell_part.dims.nnz + coo_part.dims.nnz == dims.nnz,
            "hybrid parts do not add up to nnz");
    require(ell_part.width <= split_width, "ELL part wider than split width");
    for (index_t k = 0; k < coo_part.dims.nnz; ++k) {
        // An overflow entry only exists once its row fills the ELL part.
        require(ell_part.row_len[coo_part.row_idx[k]] == split_width,
                "COO overflow entry in a row that is not full in ELL");
        const auto row = coo_part.row_idx[k];
        const auto last = ell_part.col_idx[ell_part.slot(row, split_width - 1)];
        require(coo_part.col_idx[k] > last, "COO entry precedes ELL entries of its row");
    }
}

CooMatrix coo_from_triplets(std::vector<Triplet> entries, index_t num_rows,
                            index_t num_cols)
{
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& t = entries[k];
        if (t.row >= num_rows || t.col >= num_cols) {
            throw InvalidArgument("triplet " + std::to_string(k) + " (" +
                                  std::to_string(t.row) + ", " +
                                  std::to_string(t.col) + ") out of bounds for " +
                                  std::to_string(num_rows) + "x" +
                                  std::to_string(num_cols));
        }
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Triplet& a, const Triplet& b) {
                         return a.row != b.row ? a.row < b.row : a.col < b.col;
                     });

    CooMatrix out;
    out.row_idx.reserve(entries.size());
    out.col_idx.reserve(entries.size());
    out.values.reserve(entries.size());
    for (const auto& t : entries) {
        if (!out.values.empty() && out.row_idx.back() == t.row &&
            out.col_idx.back() == t.col) {
            out.values.back() += t.value;
            continue;
        }
        out.row_idx.push_back(t.row);
        out.col_idx.push_back(t.col);
        out.values.push_back(t.value);
    }
    out.dims = {num_rows, num_cols, static_cast<index_t>(out.values.size())};
    return out;
}

CsrMatrix coo_to_csr(const CooMatrix& m)
{
    CsrMatrix out;
    out.dims = m.dims;
    out.row_ptr.assign(m.dims.num_rows + 1, 0);
    for (auto r : m.row_idx) {
        ++out.row_ptr[r + 1];
    }
    std::partial_sum(out.row_ptr.begin(), out.row_ptr.end(), out.row_ptr.begin());
    out.col_idx = m.col_idx;
    out.values = m.values;
    return out;
}

CooMatrix csr_to_coo(const CsrMatrix& m)
{
    CooMatrix out;
    out.dims = m.dims;
    out.row_idx.resize(m.dims.nnz);
    for (index_t i = 0; i < m.dims.num_rows; ++i) {
        std::fill(out.row_idx.begin() + static_cast<std::ptrdiff_t>(m.row_ptr[i]),
                  out.row_idx.begin() + static_cast<std::ptrdiff_t>(m.row_ptr[i + 1]),
                  i);
    }
    out.col_idx = m.col_idx;
    out.values = m.values;
    return out;
}

EllMatrix csr_to_ell(const CsrMatrix& m, double max_blowup)
{
    const auto rows = m.dims.num_rows;
    index_t width = 0;
    for (index_t i = 0; i < rows; ++i) {
        width = std::max(width, m.row_nnz(i));
    }
    const auto padded = static_cast<double>(rows) * static_cast<double>(width);
    if (padded > max_blowup * static_cast<double>(m.dims.nnz)) {
        throw ConversionRefused("ELL storage of " + std::to_string(rows) + "x" +
                                std::to_string(width) + " slots exceeds " +
                                std::to_string(max_blowup) + " * nnz (" +
                                std::to_string(m.dims.nnz) + ")");
    }

    EllMatrix out;
    out.dims = m.dims;
    out.width = width;
    out.col_idx.assign(rows * width, 0);
    out.values.assign(rows * width, 0.0);
    out.row_len.resize(rows);
    for (index_t i = 0; i < rows; ++i) {
        const auto len = m.row_nnz(i);
        const auto pad = pad_column(m, i);
        out.row_len[i] = len;
        for (index_t k = 0; k < width; ++k) {
            const auto slot = out.slot(i, k);
            if (k < len) {
                out.col_idx[slot] = m.col_idx[m.row_ptr[i] + k];
                out.values[slot] = m.values[m.row_ptr[i] + k];
            } else {
                out.col_idx[slot] = pad;
            }
        }
    }
    return out;
}

CooMatrix ell_to_coo(const EllMatrix& m)
{
    std::vector<Triplet> entries;
    entries.reserve(m.dims.nnz);
    for (index_t i = 0; i < m.dims.num_rows; ++i) {
        for (index_t k = 0; k < m.row_len[i]; ++k) {
            const auto slot = m.slot(i, k);
            entries.push_back({i, m.col_idx[slot], m.values[slot]});
        }
    }
    return coo_from_triplets(std::move(entries), m.dims.num_rows, m.dims.num_cols);
}

SellMatrix csr_to_sell(const CsrMatrix& m, index_t slice_size)
{
    if (slice_size == 0) {
        throw InvalidArgument("slice_size must be at least 1");
    }
    const auto rows = m.dims.num_rows;
    const auto slices = (rows + slice_size - 1) / slice_size;

    SellMatrix out;
    out.dims = m.dims;
    out.slice_size = slice_size;
    out.slice_ptr.assign(slices + 1, 0);
    out.row_len.resize(rows);
    for (index_t s = 0; s < slices; ++s) {
        index_t width = 0;
        for (auto i = s * slice_size; i < std::min(rows, (s + 1) * slice_size); ++i) {
            width = std::max(width, m.row_nnz(i));
        }
        out.slice_ptr[s + 1] = out.slice_ptr[s] + width * slice_size;
    }
    out.col_idx.assign(out.slice_ptr.back(), 0);
    out.values.assign(out.slice_ptr.back(), 0.0);

    for (index_t s = 0; s < slices; ++s) {
        const auto width = out.slice_width(s);
        for (index_t local = 0; local < slice_size; ++local) {
            const auto i = s * slice_size + local;
            const auto len = i < rows ? m.row_nnz(i) : 0;
            const auto pad = i < rows ? pad_column(m, i) : 0;
            if (i < rows) {
                out.row_len[i] = len;
            }
            for (index_t k = 0; k < width; ++k) {
                const auto pos = out.slice_ptr[s] + k * slice_size + local;
                if (k < len) {
                    out.col_idx[pos] = m.col_idx[m.row_ptr[i] + k];
                    out.values[pos] = m.values[m.row_ptr[i] + k];
                } else {
                    out.col_idx[pos] = pad;
                }
            }
        }
    }
    return out;
}

CooMatrix sell_to_coo(const SellMatrix& m)
{
    std::vector<Triplet> entries;
    entries.reserve(m.dims.nnz);
    for (index_t i = 0; i < m.dims.num_rows; ++i) {
        const auto s = i / m.slice_size;
        const auto local = i % m.slice_size;
        for (index_t k = 0; k < m.row_len[i]; ++k) {
            const auto pos = m.slice_ptr[s] + k * m.slice_size + local;
            entries.push_back({i, m.col_idx[pos], m.values[pos]});
        }
    }
    return coo_from_triplets(std::move(entries), m.dims.num_rows, m.dims.num_cols);
}

index_t hybrid_split_width(const CsrMatrix& m, const SplitStrategy& strategy)
{
    if (const auto* fixed = std::get_if<FixedWidth>(&strategy)) {
        return std::max<index_t>(fixed->width, 1);
    }
    const auto p = std::get<PercentileWidth>(strategy).percentile;
    if (!(p > 0.0 && p <= 100.0)) {
        throw InvalidArgument("hybrid percentile must lie in (0, 100]");
    }
    const auto rows = m.dims.num_rows;
    if (rows == 0) {
        return 1;
    }
    std::vector<index_t> lens(rows);
    for (index_t i = 0; i < rows; ++i) {
        lens[i] = m.row_nnz(i);
    }
    std::sort(lens.begin(), lens.end());
    // Nearest-rank percentile.
    auto rank = static_cast<index_t>(std::ceil(p / 100.0 * static_cast<double>(rows)));
    rank = std::clamp<index_t>(rank, 1, rows);
    return std::max<index_t>(lens[rank - 1], 1);
}

HybridMatrix csr_to_hybrid(const CsrMatrix& m, const SplitStrategy& strategy)
{
    const auto split = hybrid_split_width(m, strategy);
    const auto rows = m.dims.num_rows;

    CsrMatrix head;
    head.dims = {rows, m.dims.num_cols, 0};
    head.row_ptr.assign(rows + 1, 0);
    std::vector<Triplet> tail;
    for (index_t i = 0; i < rows; ++i) {
        const auto len = m.row_nnz(i);
        const auto keep = std::min(len, split);
        for (index_t k = 0; k < len; ++k) {
            const auto pos = m.row_ptr[i] + k;
            if (k < keep) {
                head.col_idx.push_back(m.col_idx[pos]);
                head.values.push_back(m.values[pos]);
            } else {
                tail.push_back({i, m.col_idx[pos], m.values[pos]});
            }
        }
        head.row_ptr[i + 1] = head.col_idx.size();
    }
    head.dims.nnz = head.col_idx.size();

    HybridMatrix out;
    out.dims = m.dims;
    out.split_width = split;
    out.ell_part = csr_to_ell(head, std::numeric_limits<double>::infinity());
    out.coo_part = coo_from_triplets(std::move(tail), rows, m.dims.num_cols);
    return out;
}

CooMatrix hybrid_to_coo(const HybridMatrix& m)
{
    auto ell = ell_to_coo(m.ell_part);
    std::vector<Triplet> entries;
    entries.reserve(m.dims.nnz);
    for (index_t k = 0; k < ell.dims.nnz; ++k) {
        entries.push_back({ell.row_idx[k], ell.col_idx[k], ell.values[k]});
    }
    const auto& coo = m.coo_part;
    for (index_t k = 0; k < coo.dims.nnz; ++k) {
        entries.push_back({coo.row_idx[k], coo.col_idx[k], coo.values[k]});
    }
    return coo_from_triplets(std::move(entries), m.dims.num_rows, m.dims.num_cols);
}

CsrMatrix csr_transpose(const CsrMatrix& m)
{
    CsrMatrix out;
    out.dims = {m.dims.num_cols, m.dims.num_rows, m.dims.nnz};
    out.row_ptr.assign(m.dims.num_cols + 1, 0);
    for (auto c : m.col_idx) {
        ++out.row_ptr[c + 1];
    }
    std::partial_sum(out.row_ptr.begin(), out.row_ptr.end(), out.row_ptr.begin());
    out.col_idx.resize(m.dims.nnz);
    out.values.resize(m.dims.nnz);
    auto next = out.row_ptr;
    // Visiting source rows in order keeps output columns sorted.
    for (index_t i = 0; i < m.dims.num_rows; ++i) {
        for (auto k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
            const auto dst = next[m.col_idx[k]]++;
            out.col_idx[dst] = i;
            out.values[dst] = m.values[k];
        }
    }
    return out;
}

RowStats row_nnz_stats(const CsrMatrix& m)
{
    RowStats s;
    const auto rows = m.dims.num_rows;
    s.per_row_nnz.resize(rows);
    if (rows == 0) {
        return s;
    }
    for (index_t i = 0; i < rows; ++i) {
        s.per_row_nnz[i] = m.row_nnz(i);
        s.max_row_nnz = std::max(s.max_row_nnz, s.per_row_nnz[i]);
    }
    const auto n = static_cast<double>(rows);
    s.mean = static_cast<double>(m.dims.nnz) / n;
    double sq = 0.0;
    for (auto len : s.per_row_nnz) {
        const auto d = static_cast<double>(len) - s.mean;
        sq += d * d;
    }
    s.variance = sq / n;
    s.stddev = std::sqrt(s.variance);
    s.cov = s.mean > 0.0 ? s.stddev / s.mean : 0.0;
    return s;
}

}  // namespace spbench
