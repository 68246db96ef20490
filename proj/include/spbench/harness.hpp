#pragma once

/// @file harness.hpp
/// @brief Benchmark campaigns behind the `spbench` command line. Every
/// command returns a process exit code: 0 success, 1 data or runtime
/// failure, 2 usage error.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "spbench/analysis.hpp"
#include "spbench/csv.hpp"
#include "spbench/krylov.hpp"
#include "spbench/spmv.hpp"

namespace spbench {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;

/// OpenMP's default thread count.
std::size_t default_workers();

struct HarnessConfig {
    std::size_t warmup = 2;
    std::size_t reps = 10;
    std::size_t workers = default_workers();
    std::uint64_t seed = 0;
    index_t min_nnz = 0;
    bool real_only = false;
    OutputFormat format = OutputFormat::csv;
    /// Output file; empty writes to the command's output stream.
    std::string out;
};

/// Parses "1MB,64MB,4096" into byte counts. Suffixes B, K/KB/KiB, M/MB/MiB
/// and G/GB/GiB are case-insensitive powers of 1024. Throws InvalidArgument.
std::vector<std::size_t> parse_size_list(std::string_view text);

/// Parses a comma-separated kernel list; "all" selects every kernel.
/// Throws InvalidArgument naming an unknown kernel.
std::vector<SpmvKernel> parse_kernel_list(std::string_view text);

/// Same for solvers.
std::vector<Solver> parse_solver_list(std::string_view text);

inline constexpr std::string_view spmv_columns[] = {
    "matrix", "kernel", "nnz", "rows", "cols", "cov", "status", "reps",
    "median_seconds", "min_seconds", "max_seconds", "gflops", "gbs"};

inline constexpr std::string_view solver_columns[] = {
    "matrix", "solver", "kernel", "iterations", "converged", "final_relres",
    "seconds_total", "seconds_spmv", "seconds_ortho", "seconds_axpy"};

/// Bytes per nonzero used for the gbs column (8 B value + 4 B index).
inline constexpr double csr_bytes_per_nnz = 12.0;

int cmd_stream(const std::vector<std::size_t>& sizes, const HarnessConfig& cfg,
               std::ostream& out, std::ostream& err);

struct SpmvCampaign {
    std::string corpus;
    std::vector<SpmvKernel> kernels;
    double max_blowup = default_max_blowup;
};

/// Times every kernel on every corpus matrix and checks each result against
/// the classical CSR product. Refused conversions are `unsupported`, wrong
/// results or exceptions `failed`; both carry an infinite median time.
int cmd_spmv(const SpmvCampaign& campaign, const HarnessConfig& cfg, std::ostream& out,
             std::ostream& err);

struct SolveOptions {
    std::string matrix;
    std::vector<Solver> solvers;
    double tol = 1e-8;
    index_t max_iters = 1000;
    index_t restart = 30;
    SpmvKernel kernel = SpmvKernel::csr_classical;
    /// Optional CSV with columns solver,iteration,residual.
    std::string residuals;
};

/// Solves A x = A * ones from x0 = 0 with every requested solver.
int cmd_solve(const SolveOptions& opts, const HarnessConfig& cfg, std::ostream& out,
              std::ostream& err);

/// Performance profile of spmv record files: kernel,theta,fraction.
int cmd_profile(const std::vector<std::string>& inputs, const HarnessConfig& cfg,
                std::ostream& out, std::ostream& err);

/// Ratio table of two spmv or two solver record files (run b time over run a
/// time). With `by_cov` spmv rows carry the matrix cov and are sorted by it.
int cmd_compare(const std::string& file_a, const std::string& file_b, bool by_cov,
                const HarnessConfig& cfg, std::ostream& out, std::ostream& err);

struct GenerateOptions {
    /// laplacian, uniform, powerlaw or arrow
    std::string kind;
    index_t n = 8;
    index_t rows = 0;
    index_t cols = 0;
    double mean_nnz = 4.0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_generate(const GenerateOptions& opts, std::ostream& out, std::ostream& err);

/// Records of an spmv CSV; rows whose status is not `ok` get infinite time.
std::vector<BenchRecord> read_bench_records(const CsvDocument& doc);
std::vector<SolverRunRecord> read_solver_records(const CsvDocument& doc);

/// Parses the command line and dispatches to a command.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spbench
