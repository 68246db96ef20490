#pragma once

// Test-only oracles and generators. Nothing here calls the kernels under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "spbench/analysis.hpp"
#include "spbench/matrix.hpp"

namespace spbench::testing {

/// The 3x3 matrix used throughout the tests:
///   [2 0 1]
///   [0 3 0]
///   [4 0 5]
inline std::vector<Triplet> canonical_triplets()
{
    return {{0, 0, 2.0}, {2, 2, 5.0}, {0, 2, 1.0}, {1, 1, 3.0}, {2, 0, 4.0}};
}

inline CooMatrix canonical_coo() { return coo_from_triplets(canonical_triplets(), 3, 3); }
inline CsrMatrix canonical_csr() { return coo_to_csr(canonical_coo()); }

/// Row-major dense copy built straight from the COO entries.
struct Dense {
    index_t rows = 0;
    index_t cols = 0;
    std::vector<double> a;

    double at(index_t i, index_t j) const { return a[i * cols + j]; }
};

inline Dense to_dense(const CooMatrix& m)
{
    Dense d{m.dims.num_rows, m.dims.num_cols,
            std::vector<double>(m.dims.num_rows * m.dims.num_cols, 0.0)};
    for (index_t k = 0; k < m.dims.nnz; ++k) {
        d.a[m.row_idx[k] * d.cols + m.col_idx[k]] += m.values[k];
    }
    return d;
}

/// Reference y = alpha*A*x + beta*y0 in extended precision, along with the
/// magnitude sum |alpha| * sum_j |a_ij x_j| + |beta y0_i| of each element,
/// which bounds the rounding error of any summation order.
struct OracleResult {
    std::vector<double> y;
    std::vector<double> scale;
};

inline OracleResult dense_matvec(const Dense& d, const std::vector<double>& x,
                                 const std::vector<double>& y0, double alpha, double beta,
                                 bool transposed = false)
{
    const auto out_len = transposed ? d.cols : d.rows;
    const auto in_len = transposed ? d.rows : d.cols;
    OracleResult r{std::vector<double>(out_len), std::vector<double>(out_len)};
    for (index_t i = 0; i < out_len; ++i) {
        long double sum = 0.0L;
        long double mag = 0.0L;
        for (index_t j = 0; j < in_len; ++j) {
            const double aij = transposed ? d.at(j, i) : d.at(i, j);
            sum += static_cast<long double>(aij) * x[j];
            mag += std::fabs(static_cast<long double>(aij) * x[j]);
        }
        long double y = static_cast<long double>(alpha) * sum;
        long double s = std::fabs(static_cast<long double>(alpha)) * mag;
        if (beta != 0.0) {
            y += static_cast<long double>(beta) * y0[i];
            s += std::fabs(static_cast<long double>(beta) * y0[i]);
        }
        r.y[i] = static_cast<double>(y);
        r.scale[i] = static_cast<double>(s);
    }
    return r;
}

/// Largest per-element relative error of `y` against the oracle. Each error
/// is measured relative to the element's magnitude sum, so cancellation in
/// the exact result does not inflate the figure.
inline double max_relative_error(const std::vector<double>& y, const OracleResult& ref)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double err = std::fabs(y[i] - ref.y[i]);
        if (err == 0.0) {
            continue;
        }
        if (!std::isfinite(err)) {
            return INFINITY;
        }
        const double denom = std::max(ref.scale[i], std::fabs(ref.y[i]));
        worst = std::max(worst, denom > 0.0 ? err / denom : INFINITY);
    }
    return worst;
}

/// Pairwise relative difference between two kernel outputs, scaled by the
/// oracle magnitude sums.
inline double max_pairwise_error(const std::vector<double>& a, const std::vector<double>& b,
                                 const OracleResult& ref)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double err = std::fabs(a[i] - b[i]);
        if (err == 0.0) {
            continue;
        }
        const double denom = std::max(ref.scale[i], std::fabs(ref.y[i]));
        worst = std::max(worst, denom > 0.0 ? err / denom : INFINITY);
    }
    return worst;
}

/// Random triplets with every coordinate independently present with
/// probability `density`; values uniform in [-1, 1).
inline CooMatrix random_coo(std::mt19937_64& rng, index_t rows, index_t cols,
                            double density)
{
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::bernoulli_distribution keep(density);
    std::vector<Triplet> t;
    for (index_t i = 0; i < rows; ++i) {
        for (index_t j = 0; j < cols; ++j) {
            if (keep(rng)) {
                t.push_back({i, j, val(rng)});
            }
        }
    }
    return coo_from_triplets(std::move(t), rows, cols);
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& e : v) {
        e = val(rng);
    }
    return v;
}

using Entry = std::tuple<index_t, index_t, double>;

inline std::vector<Entry> multiset(const CooMatrix& m)
{
    std::vector<Entry> out;
    for (index_t k = 0; k < m.dims.nnz; ++k) {
        out.emplace_back(m.row_idx[k], m.col_idx[k], m.values[k]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Matrix with a single full row `row` of length n in an n x n matrix,
/// plus the diagonal.
inline CsrMatrix arrow_matrix(index_t n, index_t row = 0)
{
    std::vector<Triplet> t;
    for (index_t j = 0; j < n; ++j) {
        t.push_back({row, j, 1.0 + static_cast<double>(j % 7)});
    }
    for (index_t i = 0; i < n; ++i) {
        if (i != row) {
            t.push_back({i, i, 2.0});
        }
    }
    return coo_to_csr(coo_from_triplets(std::move(t), n, n));
}

/// Profile value p_k(theta) straight from the definition: for every problem
/// find the fastest time by scanning all records, then count.
inline double brute_force_profile(const std::vector<BenchRecord>& recs, const std::string& kernel,
                                  const std::vector<std::string>& problems, double theta)
{
    std::size_t within = 0;
    for (const auto& p : problems) {
        double best = INFINITY;
        double mine = INFINITY;
        for (const auto& r : recs) {
            if (r.matrix != p) {
                continue;
            }
            best = std::min(best, r.median_seconds);
            if (r.kernel == kernel) {
                mine = r.median_seconds;
            }
        }
        if (std::isfinite(best) && mine / best <= theta) {
            ++within;
        }
    }
    return static_cast<double>(within) / static_cast<double>(problems.size());
}

/// Random record set; roughly one in ten pairs fails (infinite time) and
/// times are drawn from a small grid so ties are common.
inline std::vector<BenchRecord> random_records(std::mt19937_64& rng,
                                               const std::vector<std::string>& kernels,
                                               const std::vector<std::string>& problems)
{
    std::uniform_int_distribution<int> step(1, 12);
    std::bernoulli_distribution fails(0.1);
    std::vector<BenchRecord> out;
    for (const auto& p : problems) {
        for (const auto& k : kernels) {
            const double t = fails(rng) ? INFINITY : 0.25 * step(rng);
            out.push_back({p, k, 100, t});
        }
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

/// Gaussian elimination with partial pivoting in extended precision.
inline std::vector<double> dense_solve(const Dense& d, const std::vector<double>& b)
{
    const auto n = d.rows;
    std::vector<long double> m(n * (n + 1));
    for (index_t i = 0; i < n; ++i) {
        for (index_t j = 0; j < n; ++j) {
            m[i * (n + 1) + j] = d.at(i, j);
        }
        m[i * (n + 1) + n] = b[i];
    }
    auto at = [&](index_t i, index_t j) -> long double& { return m[i * (n + 1) + j]; };
    for (index_t col = 0; col < n; ++col) {
        auto piv = col;
        for (auto i = col + 1; i < n; ++i) {
            if (std::fabs(at(i, col)) > std::fabs(at(piv, col))) {
                piv = i;
            }
        }
        for (index_t j = 0; j <= n; ++j) {
            std::swap(at(col, j), at(piv, j));
        }
        for (auto i = col + 1; i < n; ++i) {
            const auto f = at(i, col) / at(col, col);
            for (auto j = col; j <= n; ++j) {
                at(i, j) -= f * at(col, j);
            }
        }
    }
    std::vector<double> x(n);
    for (index_t i = n; i-- > 0;) {
        long double s = at(i, n);
        for (auto j = i + 1; j < n; ++j) {
            s -= at(i, j) * x[j];
        }
        x[i] = static_cast<double>(s / at(i, i));
    }
    return x;
}

/// Random sparse matrix plus 3 on the diagonal.
inline CooMatrix random_nonsingular(std::mt19937_64& rng, index_t n)
{
    auto coo = random_coo(rng, n, n, 0.3);
    std::vector<Triplet> t;
    for (index_t k = 0; k < coo.dims.nnz; ++k) {
        t.push_back({coo.row_idx[k], coo.col_idx[k], coo.values[k]});
    }
    for (index_t i = 0; i < n; ++i) {
        t.push_back({i, i, 3.0});
    }
    return coo_from_triplets(std::move(t), n, n);
}

}  // namespace spbench::testing
