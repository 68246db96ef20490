#pragma once

/// @file analysis.hpp
/// @brief Post-processing of benchmark records: GFLOP/s, roofline bounds,
/// performance profiles, speedup scatter and CoV correlation data.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "spbench/matrix.hpp"

namespace spbench {

/// One timed (matrix, kernel) pair. A kernel that could not run on the
/// matrix carries an infinite median time.
struct BenchRecord {
    std::string matrix;
    std::string kernel;
    index_t nnz = 0;
    double median_seconds = 0.0;

    /// 2 * nnz / median_seconds / 1e9, zero for an infinite time.
    double gflops() const;
};

struct ProfilePoint {
    std::string kernel;
    double theta;
    double fraction;
};

/// Dolan-More performance profile over a fixed kernel and problem set.
class PerformanceProfile {
public:
    PerformanceProfile(std::vector<std::string> kernels,
                       std::map<std::string, std::vector<double>> sorted_ratios,
                       std::size_t num_problems);

    const std::vector<std::string>& kernels() const noexcept { return kernels_; }
    std::size_t num_problems() const noexcept { return num_problems_; }

    /// Per-problem ratios t / t_min of one kernel, ascending.
    const std::vector<double>& ratios(const std::string& kernel) const;

    /// Fraction of problems with ratio <= theta.
    double evaluate(const std::string& kernel, double theta) const;

    /// Every distinct finite ratio of any kernel, ascending.
    std::vector<double> breakpoints() const;

    /// The step functions sampled at breakpoints(), kernel-major in kernel order.
    std::vector<ProfilePoint> points() const;

private:
    std::vector<std::string> kernels_;
    std::map<std::string, std::vector<double>> ratios_;
    std::size_t num_problems_;
};

/// Builds the profile of `kernels` over `problems`. Records outside both sets
/// are ignored. Throws KeyMismatch naming every absent (problem, kernel) pair
/// and InvalidArgument for duplicates or non-positive times. A problem on
/// which every kernel failed gives infinite ratios for all kernels.
PerformanceProfile performance_profile(std::span<const BenchRecord> records,
                                       std::span<const std::string> kernels,
                                       std::span<const std::string> problems);

struct RooflineInputs {
    double bandwidth_gbs;
    double bytes_per_nnz;
    double flops_per_nnz;
};

/// flops_per_nnz * bandwidth_gbs / bytes_per_nnz in GFLOP/s. Throws
/// InvalidArgument for a non-positive input.
double roofline_bound(const RooflineInputs& in);

struct ScatterPoint {
    std::string matrix;
    std::string kernel;
    index_t nnz;
    /// time_b / time_a
    double speedup;
};

/// Pairs records on (matrix, kernel) in the order of `records_a`. Pairs with
/// an infinite time on either side are dropped. Throws KeyMismatch for keys
/// present in only one run.
std::vector<ScatterPoint> speedup_scatter(std::span<const BenchRecord> records_a,
                                          std::span<const BenchRecord> records_b);

struct CovPoint {
    std::string matrix;
    std::string kernel;
    double cov;
    double speedup;
};

/// speedup_scatter joined with the row statistics of each matrix, stably
/// sorted by cov. Throws KeyMismatch naming matrices without statistics.
std::vector<CovPoint> cov_correlation(std::span<const BenchRecord> records_a,
                                      std::span<const BenchRecord> records_b,
                                      const std::map<std::string, RowStats>& stats);

}  // namespace spbench
