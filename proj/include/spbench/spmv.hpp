#pragma once

/// @file spmv.hpp
/// @brief SpMV kernels computing y <- alpha * A * x + beta * y.
///
/// Every kernel shares the same contract:
///   - x.size() must equal num_cols and y.size() num_rows, otherwise
///     DimensionMismatch is thrown;
///   - with beta == 0 the incoming y is never read (it may hold NaN);
///   - with alpha == 0 the matrix is never read.
///
/// Parallel kernels run on `ExecPolicy::workers` OpenMP threads. The
/// nonzero-split kernels (csr_balanced, coo_balanced, hybrid) cut the
/// nonzeros into equal chunks; rows that straddle a chunk boundary receive
/// partial sums which are merged either in chunk order (bitwise repeatable)
/// or with atomic additions.

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <variant>

#include "spbench/matrix.hpp"

namespace spbench {

enum class SpmvKernel {
    coo_balanced,
    csr_classical,
    csr_balanced,
    csr_auto,
    ell,
    sell,
    hybrid,
};

inline constexpr std::array<SpmvKernel, 7> all_spmv_kernels = {
    SpmvKernel::coo_balanced, SpmvKernel::csr_classical, SpmvKernel::csr_balanced,
    SpmvKernel::csr_auto,     SpmvKernel::ell,           SpmvKernel::sell,
    SpmvKernel::hybrid,
};

std::string_view to_string(SpmvKernel k) noexcept;
std::optional<SpmvKernel> parse_spmv_kernel(std::string_view name) noexcept;

struct ApplyCoeffs {
    double alpha = 1.0;
    double beta = 0.0;
};

enum class MergeMode {
    ordered,  ///< boundary partials merged serially in chunk order
    atomic,   ///< boundary partials added with atomic fetch-add
};

struct ExecPolicy {
    std::size_t workers = 1;
    std::size_t over_decomposition = 4;
    MergeMode merge = MergeMode::ordered;

    /// Number of nonzero chunks used by the balanced kernels.
    std::size_t chunk_count() const;
};

/// Thresholds of the classical/balanced CSR choice.
struct AutoSelectConfig {
    double cov_threshold = 1.0;
    double max_row_factor = 4.0;
    double min_rows_per_worker = 4.0;
};

enum class CsrStrategy { classical, balanced };

/// Picks the load-balanced kernel when the row distribution is irregular
/// (cov above threshold), when a single row dominates
/// (max_row_nnz > max_row_factor * mean * workers), or when there are too few
/// rows to keep every worker busy (num_rows < min_rows_per_worker * workers).
CsrStrategy select_csr_strategy(const RowStats& stats, std::size_t worker_count,
                                const AutoSelectConfig& cfg = {});

/// Splits [0, nnz) into `chunks` contiguous ranges whose sizes differ by at
/// most one. Returns chunks + 1 boundaries.
std::vector<index_t> partition_nonzeros(index_t nnz, std::size_t chunks);

/// 2 * nnz, plus 3 * num_rows when beta is nonzero.
double spmv_flops(index_t nnz, index_t num_rows, const ApplyCoeffs& coeffs);

void spmv_csr_classical(const CsrMatrix& a, std::span<const double> x,
                        std::span<double> y, const ApplyCoeffs& coeffs = {},
                        const ExecPolicy& policy = {});
void spmv_csr_balanced(const CsrMatrix& a, std::span<const double> x,
                       std::span<double> y, const ApplyCoeffs& coeffs = {},
                       const ExecPolicy& policy = {});
void spmv_csr_auto(const CsrMatrix& a, std::span<const double> x,
                   std::span<double> y, const ApplyCoeffs& coeffs = {},
                   const ExecPolicy& policy = {}, const AutoSelectConfig& cfg = {});
void spmv_coo_balanced(const CooMatrix& a, std::span<const double> x,
                       std::span<double> y, const ApplyCoeffs& coeffs = {},
                       const ExecPolicy& policy = {});
void spmv_ell(const EllMatrix& a, std::span<const double> x, std::span<double> y,
              const ApplyCoeffs& coeffs = {}, const ExecPolicy& policy = {});
void spmv_sell(const SellMatrix& a, std::span<const double> x, std::span<double> y,
               const ApplyCoeffs& coeffs = {}, const ExecPolicy& policy = {});
void spmv_hybrid(const HybridMatrix& a, std::span<const double> x,
                 std::span<double> y, const ApplyCoeffs& coeffs = {},
                 const ExecPolicy& policy = {});

/// y <- alpha * A^T * x + beta * y without forming the transpose.
void spmv_csr_transposed(const CsrMatrix& a, std::span<const double> x,
                         std::span<double> y, const ApplyCoeffs& coeffs = {},
                         const ExecPolicy& policy = {});

/// Options used when preparing a matrix for one of the kernels.
struct FormatOptions {
    double max_blowup = default_max_blowup;
    index_t sell_slice_size = 32;
    SplitStrategy split = default_split_strategy;
    AutoSelectConfig auto_select;
};

/// A matrix converted once into the storage a kernel needs, so repeated
/// applications (benchmark reps, solver iterations) pay no conversion cost.
class SpmvOperator {
public:
    /// Throws ConversionRefused when the ELL conversion is refused.
    SpmvOperator(const CsrMatrix& a, SpmvKernel kernel, ExecPolicy policy = {},
                 const FormatOptions& options = {});

    void apply(std::span<const double> x, std::span<double> y,
               const ApplyCoeffs& coeffs = {}) const;

    SpmvKernel kernel() const noexcept { return kernel_; }
    const Dims& dims() const noexcept { return dims_; }
    const ExecPolicy& policy() const noexcept { return policy_; }
    /// For csr_auto: the strategy picked at construction.
    CsrStrategy csr_strategy() const noexcept { return strategy_; }

private:
    using Storage =
        std::variant<CsrMatrix, CooMatrix, EllMatrix, SellMatrix, HybridMatrix>;

    SpmvKernel kernel_;
    Dims dims_;
    ExecPolicy policy_;
    CsrStrategy strategy_ = CsrStrategy::classical;
    Storage storage_;
};

}  // namespace spbench
