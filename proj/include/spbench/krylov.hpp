#pragma once

/// @file krylov.hpp
/// @brief Unpreconditioned Krylov solvers (CG, FCG, BiCG, CGS, restarted
/// GMRES) built from level-1 vector operations and an SpmvOperator, with the
/// runtime of each component accounted separately.

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spbench/matrix.hpp"
#include "spbench/spmv.hpp"

namespace spbench {

enum class Solver { cg, fcg, bicg, cgs, gmres };

inline constexpr std::array<Solver, 5> all_solvers = {Solver::bicg, Solver::cg, Solver::cgs,
                                                      Solver::fcg, Solver::gmres};

std::string_view to_string(Solver s) noexcept;
std::optional<Solver> parse_solver(std::string_view name) noexcept;

/// Called after every completed iteration with the current iterate. CGS and
/// GMRES only materialize x at the end of an iteration / restart cycle, so
/// GMRES reports once per cycle.
using IterateObserver = std::function<void(index_t iteration, std::span<const double> x)>;

struct SolverConfig {
    Solver solver = Solver::cg;
    double rel_tol = 1e-8;
    index_t max_iters = 1000;
    index_t gmres_restart = 30;
    /// Second classical Gram-Schmidt pass in every Arnoldi step.
    bool reorthogonalize = false;
    SpmvKernel kernel = SpmvKernel::csr_classical;
    ExecPolicy exec;
    FormatOptions formats;
    /// |scalar| below this in a short-recurrence method is a breakdown.
    double breakdown_threshold = 1e-30;
    IterateObserver observer;

    /// Throws InvalidArgument if rel_tol <= 0, max_iters or gmres_restart is 0.
    void validate() const;
};

struct ComponentTimes {
    double spmv = 0.0;
    double orthogonalization = 0.0;
    double vector_updates = 0.0;

    double sum() const { return spmv + orthogonalization + vector_updates; }
};

enum class Termination { converged, max_iters, breakdown };

std::string_view to_string(Termination t) noexcept;

struct SolveResult {
    DenseVector x;
    /// ||r_k||_2 for k = 0..iterations. Entry 0 is the initial true residual;
    /// the last entry is the true residual ||b - A x|| of the returned x.
    std::vector<double> residual_history;
    index_t iterations = 0;
    bool converged = false;
    Termination termination = Termination::max_iters;
    /// Name of the vanishing scalar when termination is `breakdown`.
    std::optional<std::string> breakdown;
    ComponentTimes component_times;
    double total_seconds = 0.0;
    /// First history index of every GMRES restart cycle (empty otherwise).
    std::vector<index_t> cycle_starts;

    double final_relres() const;
};

/// Solves A x = b from x0. Convergence is detected on the recurrence
/// residual and then confirmed against the true residual, which is computed
/// in extended precision; if the true residual has not reached the
/// tolerance the recurrence restarts from it. Breakdowns return the partial
/// result with `breakdown` set.
SolveResult solve(const CsrMatrix& a, std::span<const double> b, std::span<const double> x0,
                  const SolverConfig& cfg);

struct GramSchmidtResult {
    std::vector<double> coefficients;
    DenseVector vector;
    double norm = 0.0;
    /// The remaining norm vanished relative to ||w||: w lies in the span.
    bool happy_breakdown = false;
};

/// Classical Gram-Schmidt: every coefficient is <basis_i, w> against the
/// original w, then w - sum_i h_i basis_i is formed in one sweep. The basis
/// must be orthonormal.
GramSchmidtResult classical_gram_schmidt(std::span<const DenseVector> basis,
                                         std::span<const double> w,
                                         bool reorthogonalize = false,
                                         std::size_t workers = 1);

/// ||b - A x||_2 accumulated in extended precision.
double true_residual_norm(const CsrMatrix& a, std::span<const double> b,
                          std::span<const double> x);

/// One solver run as recorded by the harness.
struct SolverRunRecord {
    std::string matrix;
    std::string solver;
    std::string kernel;
    index_t iterations = 0;
    bool converged = false;
    double final_relres = 0.0;
    double seconds_total = 0.0;
    double seconds_spmv = 0.0;
    double seconds_ortho = 0.0;
    double seconds_axpy = 0.0;

    double spmv_fraction() const;
};

struct SolverSpeedup {
    std::string matrix;
    std::string solver;
    /// seconds_total of run b over run a.
    double speedup;
    double spmv_fraction_a;
    double spmv_fraction_b;
};

/// Matches records on (matrix, solver) and reports total-time ratios
/// (b / a, so a faster run a gives values above 1) with the SpMV share of
/// each run. Throws KeyMismatch for unmatched keys.
std::vector<SolverSpeedup> solver_speedup_report(std::span<const SolverRunRecord> results_a,
                                                 std::span<const SolverRunRecord> results_b);

}  // namespace spbench
