#include "spbench/spmv.hpp"

#include <algorithm>
#include <atomic>
#include <string>

#include "spbench/errors.hpp"

namespace spbench {
namespace {

constexpr index_t ell_row_block = 64;

int threads(const ExecPolicy& p)
{
    return static_cast<int>(std::max<std::size_t>(p.workers, 1));
}

void check_dims(const Dims& d, std::span<const double> x, std::span<double> y)
{
    if (x.size() != d.num_cols || y.size() != d.num_rows) {
        throw DimensionMismatch("spmv on " + std::to_string(d.num_rows) + "x" +
                                std::to_string(d.num_cols) + " matrix with x of " +
                                std::to_string(x.size()) + " and y of " +
                                std::to_string(y.size()));
    }
}

/// y <- beta * y, writing zeros without reading y when beta == 0.
void scale_output(std::span<double> y, double beta, const ExecPolicy& policy)
{
    if (beta == 1.0) {
        return;
    }
    const auto n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static) num_threads(threads(policy))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        y[i] = beta == 0.0 ? 0.0 : beta * y[i];
    }
}

struct Partial {
    index_t row = 0;
    double sum = 0.0;
    bool valid = false;
};

/// Collects the partial sums of rows that straddle chunk boundaries.
class BoundaryMerge {
public:
    BoundaryMerge(std::size_t chunks, MergeMode mode, std::span<double> y, double alpha)
        : mode_(mode), y_(y), alpha_(alpha)
    {
        if (mode_ == MergeMode::ordered) {
            heads_.resize(chunks);
            tails_.resize(chunks);
        }
    }

    void publish(std::size_t chunk, index_t row, double sum, bool is_head)
    {
        if (mode_ == MergeMode::atomic) {
            std::atomic_ref<double>(y_[row]).fetch_add(alpha_ * sum,
                                                       std::memory_order_relaxed);
            return;
        }
        (is_head ? heads_ : tails_)[chunk] = {row, sum, true};
    }

    void finish()
    {
        if (mode_ != MergeMode::ordered) {
            return;
        }
        for (std::size_t c = 0; c < heads_.size(); ++c) {
            for (const auto* p : {&heads_[c], &tails_[c]}) {
                if (p->valid) {
                    y_[p->row] += alpha_ * p->sum;
                }
            }
        }
    }

private:
    MergeMode mode_;
    std::span<double> y_;
    double alpha_;
    std::vector<Partial> heads_;
    std::vector<Partial> tails_;
};

void csr_balanced_impl(const CsrMatrix& a, std::span<const double> x,
                       std::span<double> y, const ApplyCoeffs& coeffs,
                       const ExecPolicy& policy)
{
    scale_output(y, coeffs.beta, policy);
    const auto nnz = a.dims.nnz;
    if (coeffs.alpha == 0.0 || nnz == 0) {
        return;
    }
    const auto chunks = std::min<std::size_t>(policy.chunk_count(), nnz);
    const auto bounds = partition_nonzeros(nnz, chunks);
    BoundaryMerge merge(chunks, policy.merge, y, coeffs.alpha);
    const auto rows = a.dims.num_rows;
    const auto& ptr = a.row_ptr;
    const auto alpha = coeffs.alpha;

#pragma omp parallel for schedule(static) num_threads(threads(policy))
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
        const auto lo = bounds[c];
        const auto hi = bounds[c + 1];
        auto row = static_cast<index_t>(
            std::upper_bound(ptr.begin(), ptr.end(), lo) - ptr.begin() - 1);
        auto k = lo;
        while (k < hi) {
            const auto row_end = ptr[row + 1];
            const auto stop = std::min(row_end, hi);
            double sum = 0.0;
            for (; k < stop; ++k) {
                sum += a.values[k] * x[a.col_idx[k]];
            }
            const bool starts_inside = ptr[row] >= lo;
            const bool ends_inside = row_end <= hi;
            if (starts_inside && ends_inside) {
                y[row] += alpha * sum;
            } else {
                merge.publish(static_cast<std::size_t>(c), row, sum, !starts_inside);
            }
            ++row;
            while (row < rows && ptr[row + 1] <= k) {
                ++row;
            }
        }
    }
    merge.finish();
}

void csr_classical_impl(const CsrMatrix& a, std::span<const double> x,
                        std::span<double> y, const ApplyCoeffs& coeffs,
                        const ExecPolicy& policy)
{
    if (coeffs.alpha == 0.0) {
        scale_output(y, coeffs.beta, policy);
        return;
    }
    const auto rows = static_cast<std::ptrdiff_t>(a.dims.num_rows);
    const auto alpha = coeffs.alpha;
    const auto beta = coeffs.beta;
#pragma omp parallel for schedule(static) num_threads(threads(policy))
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        double sum = 0.0;
        for (auto k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            sum += a.values[k] * x[a.col_idx[k]];
        }
        y[i] = beta == 0.0 ? alpha * sum : alpha * sum + beta * y[i];
    }
}

void coo_balanced_impl(const CooMatrix& a, std::span<const double> x,
                       std::span<double> y, const ApplyCoeffs& coeffs,
                       const ExecPolicy& policy)
{
    scale_output(y, coeffs.beta, policy);
    const auto nnz = a.dims.nnz;
    if (coeffs.alpha == 0.0 || nnz == 0) {
        return;
    }
    const auto chunks = std::min<std::size_t>(policy.chunk_count(), nnz);
    const auto bounds = partition_nonzeros(nnz, chunks);
    BoundaryMerge merge(chunks, policy.merge, y, coeffs.alpha);
    const auto& rix = a.row_idx;
    const auto alpha = coeffs.alpha;

#pragma omp parallel for schedule(static) num_threads(threads(policy))
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
        const auto lo = bounds[c];
        const auto hi = bounds[c + 1];
        auto k = lo;
        while (k < hi) {
            const auto start = k;
            const auto row = rix[k];
            double sum = 0.0;
            for (; k < hi && rix[k] == row; ++k) {
                sum += a.values[k] * x[a.col_idx[k]];
            }
            const bool starts_inside = start > lo || lo == 0 || rix[lo - 1] != row;
            const bool ends_inside = k < hi || k == nnz || rix[k] != row;
            if (starts_inside && ends_inside) {
                y[row] += alpha * sum;
            } else {
                merge.publish(static_cast<std::size_t>(c), row, sum, !starts_inside);
            }
        }
    }
    merge.finish();
}

}  // namespace

std::string_view to_string(SpmvKernel k) noexcept
{
    switch (k) {
    case SpmvKernel::coo_balanced:
        return "coo_balanced";
    case SpmvKernel::csr_classical:
        return "csr_classical";
    case SpmvKernel::csr_balanced:
        return "csr_balanced";
    case SpmvKernel::csr_auto:
        return "csr_auto";
    case SpmvKernel::ell:
        return "ell";
    case SpmvKernel::sell:
        return "sell";
    case SpmvKernel::hybrid:
        return "hybrid";
    }
    return "unknown";
}

std::optional<SpmvKernel> parse_spmv_kernel(std::string_view name) noexcept
{
    for (auto k : all_spmv_kernels) {
        if (to_string(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

std::size_t ExecPolicy::chunk_count() const
{
    return std::max<std::size_t>(workers, 1) * std::max<std::size_t>(over_decomposition, 1);
}

CsrStrategy select_csr_strategy(const RowStats& stats, std::size_t worker_count,
                                const AutoSelectConfig& cfg)
{
    const auto workers = static_cast<double>(std::max<std::size_t>(worker_count, 1));
    const auto rows = static_cast<double>(stats.per_row_nnz.size());
    const bool irregular = stats.cov > cfg.cov_threshold;
    const bool dominant_row =
        static_cast<double>(stats.max_row_nnz) > cfg.max_row_factor * stats.mean * workers;
    const bool too_few_rows = rows < cfg.min_rows_per_worker * workers;
    return irregular || dominant_row || too_few_rows ? CsrStrategy::balanced
                                                     : CsrStrategy::classical;
}

std::vector<index_t> partition_nonzeros(index_t nnz, std::size_t chunks)
{
    const index_t n = std::max<std::size_t>(chunks, 1);
    const auto base = nnz / n;
    const auto extra = nnz % n;
    std::vector<index_t> bounds(n + 1);
    for (index_t c = 0; c <= n; ++c) {
        bounds[c] = c * base + std::min(c, extra);
    }
    return bounds;
}

double spmv_flops(index_t nnz, index_t num_rows, const ApplyCoeffs& coeffs)
{
    auto flops = 2.0 * static_cast<double>(nnz);
    if (coeffs.beta != 0.0) {
        flops += 3.0 * static_cast<double>(num_rows);
    }
    return flops;
}

void spmv_csr_classical(const CsrMatrix& a, std::span<const double> x,
                        std::span<double> y, const ApplyCoeffs& coeffs,
                        const ExecPolicy& policy)
{
    check_dims(a.dims, x, y);
    csr_classical_impl(a, x, y, coeffs, policy);
}

void spmv_csr_balanced(const CsrMatrix& a, std::span<const double> x,
                       std::span<double> y, const ApplyCoeffs& coeffs,
                       const ExecPolicy& policy)
{
    check_dims(a.dims, x, y);
    csr_balanced_impl(a, x, y, coeffs, policy);
}

void spmv_csr_auto(const CsrMatrix& a, std::span<const double> x,
                   std::span<double> y, const ApplyCoeffs& coeffs,
                   const ExecPolicy& policy, const AutoSelectConfig& cfg)
{
    check_dims(a.dims, x, y);
    if (select_csr_strategy(row_nnz_stats(a), policy.workers, cfg) ==
        CsrStrategy::balanced) {
        csr_balanced_impl(a, x, y, coeffs, policy);
    } else {
        csr_classical_impl(a, x, y, coeffs, policy);
    }
}

void spmv_coo_balanced(const CooMatrix& a, std::span<const double> x,
                       std::span<double> y, const ApplyCoeffs& coeffs,
                       const ExecPolicy& policy)
{
    check_dims(a.dims, x, y);
    coo_balanced_impl(a, x, y, coeffs, policy);
}

void spmv_ell(const EllMatrix& a, std::span<const double> x, std::span<double> y,
              const ApplyCoeffs& coeffs, const ExecPolicy& policy)
{
    check_dims(a.dims, x, y);
    if (coeffs.alpha == 0.0) {
        scale_output(y, coeffs.beta, policy);
        return;
    }
    const auto rows = a.dims.num_rows;
    const auto blocks = static_cast<std::ptrdiff_t>((rows + ell_row_block - 1) / ell_row_block);
    const auto alpha = coeffs.alpha;
    const auto beta = coeffs.beta;
#pragma omp parallel for schedule(static) num_threads(threads(policy))
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
        const auto first = static_cast<index_t>(b) * ell_row_block;
        const auto count = std::min(ell_row_block, rows - first);
        double acc[ell_row_block] = {};
        for (index_t k = 0; k < a.width; ++k) {
            const auto base = k * rows + first;
            for (index_t i = 0; i < count; ++i) {
                acc[i] += a.values[base + i] * x[a.col_idx[base + i]];
            }
        }
        for (index_t i = 0; i < count; ++i) {
            auto& out = y[first + i];
            out = beta == 0.0 ? alpha * acc[i] : alpha * acc[i] + beta * out;
        }
    }
}

void spmv_sell(const SellMatrix& a, std::span<const double> x, std::span<double> y,
               const ApplyCoeffs& coeffs, const ExecPolicy& policy)
{
    check_dims(a.dims, x, y);
    if (coeffs.alpha == 0.0) {
        scale_output(y, coeffs.beta, policy);
        return;
    }
    const auto rows = a.dims.num_rows;
    const auto size = a.slice_size;
    const auto slices = static_cast<std::ptrdiff_t>(a.num_slices());
    const auto alpha = coeffs.alpha;
    const auto beta = coeffs.beta;
#pragma omp parallel num_threads(threads(policy))
    {
        std::vector<double> acc(size);
#pragma omp for schedule(static)
        for (std::ptrdiff_t s = 0; s < slices; ++s) {
            const auto first = static_cast<index_t>(s) * size;
            const auto count = std::min(size, rows - first);
            const auto width = a.slice_width(static_cast<index_t>(s));
            std::fill(acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(count), 0.0);
            for (index_t k = 0; k < width; ++k) {
                const auto base = a.slice_ptr[s] + k * size;
                for (index_t i = 0; i < count; ++i) {
                    acc[i] += a.values[base + i] * x[a.col_idx[base + i]];
                }
            }
            for (index_t i = 0; i < count; ++i) {
                auto& out = y[first + i];
                out = beta == 0.0 ? alpha * acc[i] : alpha * acc[i] + beta * out;
            }
        }
    }
}

void spmv_hybrid(const HybridMatrix& a, std::span<const double> x,
                 std::span<double> y, const ApplyCoeffs& coeffs,
                 const ExecPolicy& policy)
{
    check_dims(a.dims, x, y);
    spmv_ell(a.ell_part, x, y, coeffs, policy);
    spmv_coo_balanced(a.coo_part, x, y, {coeffs.alpha, 1.0}, policy);
}

void spmv_csr_transposed(const CsrMatrix& a, std::span<const double> x,
                         std::span<double> y, const ApplyCoeffs& coeffs,
                         const ExecPolicy& policy)
{
    const Dims t{a.dims.num_cols, a.dims.num_rows, a.dims.nnz};
    check_dims(t, x, y);
    scale_output(y, coeffs.beta, policy);
    if (coeffs.alpha == 0.0) {
        return;
    }
    const auto workers = static_cast<std::size_t>(threads(policy));
    const auto rows = a.dims.num_rows;
    const auto cols = a.dims.num_cols;
    // One private scatter buffer per worker, reduced in worker order.
    std::vector<DenseVector> partial(workers, DenseVector(cols, 0.0));
    const auto bounds = partition_nonzeros(rows, workers);
#pragma omp parallel for schedule(static) num_threads(static_cast<int>(workers))
    for (std::ptrdiff_t w = 0; w < static_cast<std::ptrdiff_t>(workers); ++w) {
        auto& buf = partial[w];
        for (auto i = bounds[w]; i < bounds[w + 1]; ++i) {
            for (auto k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
                buf[a.col_idx[k]] += a.values[k] * x[i];
            }
        }
    }
    const auto alpha = coeffs.alpha;
#pragma omp parallel for schedule(static) num_threads(static_cast<int>(workers))
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(cols); ++j) {
        double sum = 0.0;
        for (const auto& buf : partial) {
            sum += buf[j];
        }
        y[j] += alpha * sum;
    }
}

SpmvOperator::SpmvOperator(const CsrMatrix& a, SpmvKernel kernel, ExecPolicy policy,
                           const FormatOptions& options)
    : kernel_(kernel), dims_(a.dims), policy_(policy)
{
    switch (kernel) {
    case SpmvKernel::coo_balanced:
        storage_ = csr_to_coo(a);
        break;
    case SpmvKernel::csr_auto:
        strategy_ = select_csr_strategy(row_nnz_stats(a), policy_.workers,
                                        options.auto_select);
        storage_ = a;
        break;
    case SpmvKernel::csr_classical:
        storage_ = a;
        break;
    case SpmvKernel::csr_balanced:
        strategy_ = CsrStrategy::balanced;
        storage_ = a;
        break;
    case SpmvKernel::ell:
        storage_ = csr_to_ell(a, options.max_blowup);
        break;
    case SpmvKernel::sell:
        storage_ = csr_to_sell(a, options.sell_slice_size);
        break;
    case SpmvKernel::hybrid:
        storage_ = csr_to_hybrid(a, options.split);
        break;
    }
}

void SpmvOperator::apply(std::span<const double> x, std::span<double> y,
                         const ApplyCoeffs& coeffs) const
{
    switch (kernel_) {
    case SpmvKernel::coo_balanced:
        spmv_coo_balanced(std::get<CooMatrix>(storage_), x, y, coeffs, policy_);
        break;
    case SpmvKernel::csr_classical:
    case SpmvKernel::csr_balanced:
    case SpmvKernel::csr_auto: {
        const auto& csr = std::get<CsrMatrix>(storage_);
        check_dims(csr.dims, x, y);
        if (strategy_ == CsrStrategy::balanced) {
            csr_balanced_impl(csr, x, y, coeffs, policy_);
        } else {
            csr_classical_impl(csr, x, y, coeffs, policy_);
        }
        break;
    }
    case SpmvKernel::ell:
        spmv_ell(std::get<EllMatrix>(storage_), x, y, coeffs, policy_);
        break;
    case SpmvKernel::sell:
        spmv_sell(std::get<SellMatrix>(storage_), x, y, coeffs, policy_);
        break;
    case SpmvKernel::hybrid:
        spmv_hybrid(std::get<HybridMatrix>(storage_), x, y, coeffs, policy_);
        break;
    }
}

}  // namespace spbench
