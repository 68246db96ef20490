#pragma once

/// @file matrix.hpp
/// @brief Sparse storage formats (COO, CSR, ELL, SELL, hybrid ELL+COO),
/// conversions between them, and nonzero-per-row statistics.
///
/// All formats are plain value types. They are built once by the conversion
/// functions below and only read afterwards, so sharing one instance between
/// threads is safe.

#include <cstdint>
#include <limits>
#include <variant>
#include <vector>

namespace spbench {

using index_t = std::uint64_t;
using DenseVector = std::vector<double>;

struct Dims {
    index_t num_rows = 0;
    index_t num_cols = 0;
    index_t nnz = 0;

    friend bool operator==(const Dims&, const Dims&) = default;
};

struct Triplet {
    index_t row;
    index_t col;
    double value;
};

/// Coordinate format: entries sorted by (row, col), no duplicates.
struct CooMatrix {
    Dims dims;
    std::vector<index_t> row_idx;
    std::vector<index_t> col_idx;
    std::vector<double> values;

    /// Throws InvalidArgument if any structural invariant is violated.
    void validate() const;

    friend bool operator==(const CooMatrix&, const CooMatrix&) = default;
};

/// Compressed sparse row format with strictly increasing columns per row.
struct CsrMatrix {
    Dims dims;
    std::vector<index_t> row_ptr;
    std::vector<index_t> col_idx;
    std::vector<double> values;

    index_t row_nnz(index_t row) const { return row_ptr[row + 1] - row_ptr[row]; }

    void validate() const;

    friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

/// ELLPACK: every row padded to `width` slots, stored column-major, so slot k
/// of row i lives at k * num_rows + i. Pad slots hold value 0 and repeat the
/// row's last real column (0 for an empty row). `row_len` records how many
/// leading slots of each row are real entries; kernels do not read it.
struct EllMatrix {
    Dims dims;
    index_t width = 0;
    std::vector<index_t> col_idx;
    std::vector<double> values;
    std::vector<index_t> row_len;

    index_t slot(index_t row, index_t k) const { return k * dims.num_rows + row; }
    index_t storage() const { return static_cast<index_t>(values.size()); }

    void validate() const;
};

/// Sliced ELLPACK. Rows are grouped into slices of `slice_size`; each slice
/// is padded to its own widest row and stored column-major starting at
/// slice_ptr[s]. The trailing slice is padded to a full `slice_size` rows so
/// that a slice's width is always (slice_ptr[s+1] - slice_ptr[s]) / slice_size.
struct SellMatrix {
    Dims dims;
    index_t slice_size = 1;
    std::vector<index_t> slice_ptr;
    std::vector<index_t> col_idx;
    std::vector<double> values;
    std::vector<index_t> row_len;

    index_t num_slices() const { return static_cast<index_t>(slice_ptr.size()) - 1; }
    index_t slice_width(index_t s) const
    {
        return (slice_ptr[s + 1] - slice_ptr[s]) / slice_size;
    }
    index_t storage() const { return static_cast<index_t>(values.size()); }

    void validate() const;
};

/// ELL for the leading `split_width` entries of every row, COO for the rest.
struct HybridMatrix {
    Dims dims;
    EllMatrix ell_part;
    CooMatrix coo_part;
    index_t split_width = 0;

    void validate() const;
};

/// Hybrid split rules.
struct FixedWidth {
    index_t width;
};
/// Split at the p-th percentile (nearest rank, p in (0, 100]) of the
/// nonzero-per-row distribution.
struct PercentileWidth {
    double percentile;
};
using SplitStrategy = std::variant<FixedWidth, PercentileWidth>;

inline constexpr double default_max_blowup = 8.0;
inline constexpr SplitStrategy default_split_strategy = PercentileWidth{80.0};

/// Summary of the nonzero-per-row distribution. `variance` is the population
/// variance; `cov` is stddev / mean (0 when mean is 0). The literal
/// variance / mean ratio is available through `variance_to_mean()`.
struct RowStats {
    std::vector<index_t> per_row_nnz;
    double mean = 0.0;
    double variance = 0.0;
    double stddev = 0.0;
    double cov = 0.0;
    index_t max_row_nnz = 0;

    double variance_to_mean() const { return mean > 0.0 ? variance / mean : 0.0; }
};

/// Sorts the triplets, sums duplicate coordinates and keeps explicit zeros.
/// Throws InvalidArgument naming the first out-of-bounds triplet.
CooMatrix coo_from_triplets(std::vector<Triplet> entries, index_t num_rows,
                            index_t num_cols);

CsrMatrix coo_to_csr(const CooMatrix& m);
CooMatrix csr_to_coo(const CsrMatrix& m);

/// Throws ConversionRefused when num_rows * width > max_blowup * nnz.
EllMatrix csr_to_ell(const CsrMatrix& m, double max_blowup = default_max_blowup);
CooMatrix ell_to_coo(const EllMatrix& m);

/// Throws InvalidArgument when slice_size is 0.
SellMatrix csr_to_sell(const CsrMatrix& m, index_t slice_size);
CooMatrix sell_to_coo(const SellMatrix& m);

/// Width the given strategy picks for `m` (at least 1).
index_t hybrid_split_width(const CsrMatrix& m, const SplitStrategy& strategy);
HybridMatrix csr_to_hybrid(const CsrMatrix& m,
                           const SplitStrategy& strategy = default_split_strategy);
CooMatrix hybrid_to_coo(const HybridMatrix& m);

CsrMatrix csr_transpose(const CsrMatrix& m);

RowStats row_nnz_stats(const CsrMatrix& m);

}  // namespace spbench
