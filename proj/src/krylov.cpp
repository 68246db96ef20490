#include "spbench/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "spbench/errors.hpp"
#include "spbench/timing.hpp"

namespace spbench {
namespace {

int threads(std::size_t workers)
{
    return static_cast<int>(std::max<std::size_t>(workers, 1));
}

/// Dot product with per-worker partials combined in worker order.
double parallel_dot(std::span<const double> a, std::span<const double> b, std::size_t workers)
{
    const auto w = static_cast<std::size_t>(threads(workers));
    const auto n = a.size();
    if (w == 1) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += a[i] * b[i];
        }
        return sum;
    }
    std::vector<double> partial(w, 0.0);
#pragma omp parallel for schedule(static, 1) num_threads(static_cast<int>(w))
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(w); ++t) {
        const auto lo = n * static_cast<std::size_t>(t) / w;
        const auto hi = n * (static_cast<std::size_t>(t) + 1) / w;
        double sum = 0.0;
        for (auto i = lo; i < hi; ++i) {
            sum += a[i] * b[i];
        }
        partial[t] = sum;
    }
    double total = 0.0;
    for (auto p : partial) {
        total += p;
    }
    return total;
}

/// y <- alpha * x + beta * y
void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y,
           std::size_t workers)
{
    const auto n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static) num_threads(threads(workers))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        y[i] = alpha * x[i] + beta * y[i];
    }
}

class ScopedTimer {
public:
    explicit ScopedTimer(double& sink) : sink_(sink), start_(Clock::now()) {}
    ~ScopedTimer() { sink_ += seconds_since(start_); }
    ScopedTimer(const ScopedTimer&) = delete;
    ScopedTimer& operator=(const ScopedTimer&) = delete;

private:
    double& sink_;
    Clock::time_point start_;
};

enum class Step { proceed, restart, done };

/// Shared state and bookkeeping of one solve.
class SolveContext {
public:
    SolveContext(const CsrMatrix& a, std::span<const double> b, const SolverConfig& cfg,
                 SolveResult& result)
        : a_(a), b_(b), cfg_(cfg), res_(result), op_(a, cfg.kernel, cfg.exec, cfg.formats)
    {}

    const SolverConfig& cfg() const { return cfg_; }
    SolveResult& result() { return res_; }
    std::size_t size() const { return b_.size(); }
    std::size_t workers() const { return cfg_.exec.workers; }
    DenseVector& x() { return res_.x; }
    double target() const { return cfg_.rel_tol * res_.residual_history.front(); }

    /// Records the initial residual; returns false if x0 already solves it.
    bool start()
    {
        double r0 = 0.0;
        {
            ScopedTimer t(res_.component_times.spmv);
            r0 = true_residual_norm(a_, b_, res_.x);
        }
        res_.residual_history.push_back(r0);
        if (r0 == 0.0) {
            res_.converged = true;
            res_.termination = Termination::converged;
            return false;
        }
        return true;
    }

    void spmv(std::span<const double> in, std::span<double> out)
    {
        ScopedTimer t(res_.component_times.spmv);
        op_.apply(in, out, {1.0, 0.0});
    }

    void spmv_transposed(std::span<const double> in, std::span<double> out)
    {
        if (!op_t_) {
            op_t_.emplace(csr_transpose(a_), cfg_.kernel, cfg_.exec, cfg_.formats);
        }
        ScopedTimer t(res_.component_times.spmv);
        op_t_->apply(in, out, {1.0, 0.0});
    }

    /// r <- b - A x
    void residual(std::span<double> r)
    {
        ScopedTimer t(res_.component_times.spmv);
        std::copy(b_.begin(), b_.end(), r.begin());
        op_.apply(res_.x, r, {-1.0, 1.0});
    }

    double dot(std::span<const double> a, std::span<const double> b)
    {
        ScopedTimer t(res_.component_times.orthogonalization);
        return parallel_dot(a, b, workers());
    }

    double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

    void update(double alpha, std::span<const double> x, double beta, std::span<double> y)
    {
        ScopedTimer t(res_.component_times.vector_updates);
        axpby(alpha, x, beta, y, workers());
    }

    void copy(std::span<const double> from, std::span<double> to)
    {
        ScopedTimer t(res_.component_times.vector_updates);
        std::copy(from.begin(), from.end(), to.begin());
    }

    /// Replaces the newest history entry with the true residual of x.
    double confirm()
    {
        double t = 0.0;
        {
            ScopedTimer timer(res_.component_times.spmv);
            t = true_residual_norm(a_, b_, res_.x);
        }
        res_.residual_history.back() = t;
        return t;
    }

    void notify()
    {
        if (cfg_.observer) {
            cfg_.observer(res_.iterations, res_.x);
        }
    }

    /// Bookkeeping after one iteration that produced recurrence residual
    /// norm `rnorm`.
    Step step(double rnorm, bool notify_observer = true)
    {
        ++res_.iterations;
        res_.residual_history.push_back(rnorm);
        if (notify_observer) {
            notify();
        }
        return settle(rnorm);
    }

    /// Decides whether to stop once the newest history entry is final.
    Step settle(double rnorm)
    {
        const bool exhausted = res_.iterations >= cfg_.max_iters;
        if (rnorm <= target() || exhausted) {
            const double t = confirm();
            if (t <= target()) {
                res_.converged = true;
                res_.termination = Termination::converged;
                return Step::done;
            }
            if (exhausted) {
                res_.termination = Termination::max_iters;
                return Step::done;
            }
            return Step::restart;
        }
        return Step::proceed;
    }

    /// Flags a breakdown when |value| is below the threshold.
    bool breaks_down(double value, const char* name)
    {
        if (std::isfinite(value) && std::fabs(value) >= cfg_.breakdown_threshold) {
            return false;
        }
        const double t = confirm();
        res_.converged = t <= target();
        res_.termination = Termination::breakdown;
        res_.breakdown = name;
        return true;
    }

private:
    const CsrMatrix& a_;
    std::span<const double> b_;
    const SolverConfig& cfg_;
    SolveResult& res_;
    SpmvOperator op_;
    std::optional<SpmvOperator> op_t_;
};

void run_cg(SolveContext& c)
{
    const auto n = c.size();
    auto& x = c.x();
    DenseVector r(n), p(n), q(n);
    double rho = 0.0;
    bool fresh = true;
    while (true) {
        if (fresh) {
            c.residual(r);
            c.copy(r, p);
            rho = c.dot(r, r);
            fresh = false;
        }
        c.spmv(p, q);
        const double pq = c.dot(p, q);
        if (c.breaks_down(pq, "p^T A p")) {
            return;
        }
        const double alpha = rho / pq;
        c.update(alpha, p, 1.0, x);
        c.update(-alpha, q, 1.0, r);
        const double next_rho = c.dot(r, r);
        const auto s = c.step(std::sqrt(next_rho));
        if (s == Step::done) {
            return;
        }
        if (s == Step::restart) {
            fresh = true;
            continue;
        }
        if (c.breaks_down(rho, "rho")) {
            return;
        }
        const double beta = next_rho / rho;
        rho = next_rho;
        c.update(1.0, r, beta, p);
    }
}

void run_fcg(SolveContext& c)
{
    const auto n = c.size();
    auto& x = c.x();
    DenseVector r(n), p(n), q(n), t(n);
    double rho = 0.0;
    bool fresh = true;
    while (true) {
        if (fresh) {
            c.residual(r);
            c.copy(r, p);
            rho = c.dot(r, r);
            fresh = false;
        }
        c.spmv(p, q);
        const double pq = c.dot(p, q);
        if (c.breaks_down(pq, "p^T A p")) {
            return;
        }
        const double alpha = rho / pq;
        c.update(alpha, p, 1.0, x);
        c.copy(r, t);
        c.update(-alpha, q, 1.0, r);
        const double next_rho = c.dot(r, r);
        const auto s = c.step(std::sqrt(next_rho));
        if (s == Step::done) {
            return;
        }
        if (s == Step::restart) {
            fresh = true;
            continue;
        }
        if (c.breaks_down(rho, "rho")) {
            return;
        }
        // Polak-Ribiere: beta = <r, r - r_prev> / <r_prev, r_prev>
        c.update(1.0, r, -1.0, t);
        const double rho_t = c.dot(r, t);
        const double beta = rho_t / rho;
        rho = next_rho;
        c.update(1.0, r, beta, p);
    }
}

void run_bicg(SolveContext& c)
{
    const auto n = c.size();
    auto& x = c.x();
    DenseVector r(n), rt(n), p(n), pt(n), q(n), qt(n);
    double rho = 0.0;
    bool fresh = true;
    while (true) {
        if (fresh) {
            c.residual(r);
            c.copy(r, rt);
            c.copy(r, p);
            c.copy(rt, pt);
            rho = c.dot(rt, r);
            fresh = false;
        }
        c.spmv(p, q);
        c.spmv_transposed(pt, qt);
        const double ptq = c.dot(pt, q);
        if (c.breaks_down(ptq, "pt^T A p")) {
            return;
        }
        const double alpha = rho / ptq;
        c.update(alpha, p, 1.0, x);
        c.update(-alpha, q, 1.0, r);
        c.update(-alpha, qt, 1.0, rt);
        const auto s = c.step(c.norm(r));
        if (s == Step::done) {
            return;
        }
        if (s == Step::restart) {
            fresh = true;
            continue;
        }
        const double next_rho = c.dot(rt, r);
        if (c.breaks_down(rho, "rho") || c.breaks_down(next_rho, "rho")) {
            return;
        }
        const double beta = next_rho / rho;
        rho = next_rho;
        c.update(1.0, r, beta, p);
        c.update(1.0, rt, beta, pt);
    }
}

void run_cgs(SolveContext& c)
{
    const auto n = c.size();
    auto& x = c.x();
    DenseVector r(n), rt(n), u(n), p(n), q(n), vhat(n), uhat(n), qhat(n);
    double rho_prev = 0.0;
    bool fresh = true;
    while (true) {
        bool first = false;
        if (fresh) {
            c.residual(r);
            c.copy(r, rt);
            fresh = false;
            first = true;
        }
        const double rho = c.dot(rt, r);
        if (c.breaks_down(rho, "rho")) {
            return;
        }
        if (first) {
            c.copy(r, u);
            c.copy(u, p);
        } else {
            const double beta = rho / rho_prev;
            c.copy(r, u);
            c.update(beta, q, 1.0, u);          // u = r + beta q
            c.update(beta, p, 1.0, q);          // q = q + beta p
            c.update(1.0, u, beta, q);          // q = u + beta (q + beta p)
            c.copy(q, p);
        }
        c.spmv(p, vhat);
        const double sigma = c.dot(rt, vhat);
        if (c.breaks_down(sigma, "rt^T A p")) {
            return;
        }
        const double alpha = rho / sigma;
        c.copy(u, q);
        c.update(-alpha, vhat, 1.0, q);         // q = u - alpha vhat
        c.copy(u, uhat);
        c.update(1.0, q, 1.0, uhat);            // uhat = u + q
        c.update(alpha, uhat, 1.0, x);
        c.spmv(uhat, qhat);
        c.update(-alpha, qhat, 1.0, r);
        rho_prev = rho;
        const auto s = c.step(c.norm(r));
        if (s == Step::done) {
            return;
        }
        if (s == Step::restart) {
            fresh = true;
        }
    }
}

void run_gmres(SolveContext& c)
{
    const auto n = c.size();
    const auto m = static_cast<std::size_t>(c.cfg().gmres_restart);
    auto& res = c.result();
    auto& x = c.x();
    DenseVector r(n), w(n);
    double& ortho_time = res.component_times.orthogonalization;

    bool first_cycle = true;
    while (true) {
        c.residual(r);
        const double beta = c.norm(r);
        if (!first_cycle) {
            res.residual_history.back() = beta;
        }
        first_cycle = false;
        res.cycle_starts.push_back(res.residual_history.size() - 1);

        std::vector<DenseVector> basis;
        basis.reserve(m + 1);
        basis.emplace_back(n);
        c.update(1.0 / beta, r, 0.0, basis.back());

        // hess[j] is column j of the Hessenberg matrix, rotated in place.
        std::vector<std::vector<double>> hess;
        std::vector<double> cs, sn;
        std::vector<double> g(m + 1, 0.0);
        g[0] = beta;
        double estimate = beta;
        bool happy = false;
        const char* broke = nullptr;

        for (std::size_t j = 0; j < m; ++j) {
            c.spmv(basis[j], w);
            GramSchmidtResult gs;
            {
                ScopedTimer t(ortho_time);
                gs = classical_gram_schmidt(basis, w, c.cfg().reorthogonalize, c.workers());
            }
            {
                ScopedTimer t(ortho_time);
                auto h = std::move(gs.coefficients);
                h.push_back(gs.norm);
                for (std::size_t i = 0; i < j; ++i) {
                    const double tmp = cs[i] * h[i] + sn[i] * h[i + 1];
                    h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                    h[i] = tmp;
                }
                const double denom = std::hypot(h[j], h[j + 1]);
                if (denom == 0.0) {
                    broke = "hessenberg";
                    break;
                }
                cs.push_back(h[j] / denom);
                sn.push_back(h[j + 1] / denom);
                h[j] = denom;
                h[j + 1] = 0.0;
                g[j + 1] = -sn[j] * g[j];
                g[j] = cs[j] * g[j];
                hess.push_back(std::move(h));
            }
            estimate = std::fabs(g[j + 1]);
            ++res.iterations;
            res.residual_history.push_back(estimate);
            happy = gs.happy_breakdown;
            if (estimate <= c.target() || happy || res.iterations >= c.cfg().max_iters) {
                break;
            }
            basis.emplace_back(n);
            c.update(1.0 / gs.norm, gs.vector, 0.0, basis.back());
        }

        // x += V y with H y = g on the k completed columns
        const auto k = hess.size();
        std::vector<double> y(k, 0.0);
        {
            ScopedTimer t(ortho_time);
            for (std::size_t i = k; i-- > 0;) {
                double sum = g[i];
                for (std::size_t l = i + 1; l < k; ++l) {
                    sum -= hess[l][i] * y[l];
                }
                y[i] = sum / hess[i][i];
            }
        }
        for (std::size_t i = 0; i < k; ++i) {
            c.update(y[i], basis[i], 1.0, x);
        }
        c.notify();

        if (broke != nullptr) {
            c.breaks_down(0.0, broke);
            return;
        }
        if (c.settle(happy ? 0.0 : estimate) == Step::done) {
            return;
        }
    }
}

}  // namespace

std::string_view to_string(Solver s) noexcept
{
    switch (s) {
    case Solver::cg:
        return "cg";
    case Solver::fcg:
        return "fcg";
    case Solver::bicg:
        return "bicg";
    case Solver::cgs:
        return "cgs";
    case Solver::gmres:
        return "gmres";
    }
    return "unknown";
}

std::optional<Solver> parse_solver(std::string_view name) noexcept
{
    for (auto s : all_solvers) {
        if (to_string(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

std::string_view to_string(Termination t) noexcept
{
    switch (t) {
    case Termination::converged:
        return "converged";
    case Termination::max_iters:
        return "max_iters";
    case Termination::breakdown:
        return "breakdown";
    }
    return "unknown";
}

void SolverConfig::validate() const
{
    if (!(rel_tol > 0.0)) {
        throw InvalidArgument("rel_tol must be positive");
    }
    if (max_iters == 0) {
        throw InvalidArgument("max_iters must be at least 1");
    }
    if (gmres_restart == 0) {
        throw InvalidArgument("gmres_restart must be at least 1");
    }
}

double SolveResult::final_relres() const
{
    if (residual_history.empty()) {
        return 0.0;
    }
    const double r0 = residual_history.front();
    return r0 > 0.0 ? residual_history.back() / r0 : 0.0;
}

SolveResult solve(const CsrMatrix& a, std::span<const double> b, std::span<const double> x0,
                  const SolverConfig& cfg)
{
    const auto start = Clock::now();
    cfg.validate();
    if (a.dims.num_rows != a.dims.num_cols) {
        throw DimensionMismatch("solve needs a square matrix, got " +
                                std::to_string(a.dims.num_rows) + "x" +
                                std::to_string(a.dims.num_cols));
    }
    if (b.size() != a.dims.num_rows || x0.size() != a.dims.num_rows) {
        throw DimensionMismatch("right-hand side or initial guess length differs from " +
                                std::to_string(a.dims.num_rows));
    }
    SolveResult result;
    result.x.assign(x0.begin(), x0.end());
    {
        SolveContext ctx(a, b, cfg, result);
        if (ctx.start()) {
            switch (cfg.solver) {
            case Solver::cg:
                run_cg(ctx);
                break;
            case Solver::fcg:
                run_fcg(ctx);
                break;
            case Solver::bicg:
                run_bicg(ctx);
                break;
            case Solver::cgs:
                run_cgs(ctx);
                break;
            case Solver::gmres:
                run_gmres(ctx);
                break;
            }
        }
    }
    result.total_seconds = seconds_since(start);
    return result;
}

GramSchmidtResult classical_gram_schmidt(std::span<const DenseVector> basis,
                                         std::span<const double> w, bool reorthogonalize,
                                         std::size_t workers)
{
    GramSchmidtResult out;
    out.vector.assign(w.begin(), w.end());
    out.coefficients.assign(basis.size(), 0.0);
    for (const auto& v : basis) {
        if (v.size() != w.size()) {
            throw DimensionMismatch("basis vector length differs from w");
        }
    }
    const double w_norm = std::sqrt(parallel_dot(w, w, workers));
    const int passes = reorthogonalize ? 2 : 1;
    std::vector<double> h(basis.size());
    for (int pass = 0; pass < passes; ++pass) {
        // all coefficients against the same vector, then one subtraction sweep
        for (std::size_t i = 0; i < basis.size(); ++i) {
            h[i] = parallel_dot(basis[i], out.vector, workers);
        }
        for (std::size_t i = 0; i < basis.size(); ++i) {
            axpby(-h[i], basis[i], 1.0, out.vector, workers);
            out.coefficients[i] += h[i];
        }
    }
    out.norm = std::sqrt(parallel_dot(out.vector, out.vector, workers));
    out.happy_breakdown = out.norm <= 1e-12 * w_norm;
    return out;
}

double true_residual_norm(const CsrMatrix& a, std::span<const double> b,
                          std::span<const double> x)
{
    if (b.size() != a.dims.num_rows || x.size() != a.dims.num_cols) {
        throw DimensionMismatch("residual operands do not match the matrix");
    }
    long double total = 0.0L;
    for (index_t i = 0; i < a.dims.num_rows; ++i) {
        long double r = b[i];
        for (auto k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            r -= static_cast<long double>(a.values[k]) * x[a.col_idx[k]];
        }
        total += r * r;
    }
    return static_cast<double>(std::sqrt(total));
}

double SolverRunRecord::spmv_fraction() const
{
    return seconds_total > 0.0 ? seconds_spmv / seconds_total : 0.0;
}

std::vector<SolverSpeedup> solver_speedup_report(std::span<const SolverRunRecord> results_a,
                                                 std::span<const SolverRunRecord> results_b)
{
    using Key = std::pair<std::string, std::string>;
    std::map<Key, const SolverRunRecord*> b_index;
    for (const auto& r : results_b) {
        b_index[{r.matrix, r.solver}] = &r;
    }
    std::map<Key, bool> seen;
    std::vector<std::string> missing;
    std::vector<SolverSpeedup> out;
    for (const auto& a : results_a) {
        const Key key{a.matrix, a.solver};
        seen[key] = true;
        const auto it = b_index.find(key);
        if (it == b_index.end()) {
            missing.push_back("(" + a.matrix + ", " + a.solver + ") in run b");
            continue;
        }
        const auto& b = *it->second;
        out.push_back({a.matrix, a.solver, b.seconds_total / a.seconds_total,
                       a.spmv_fraction(), b.spmv_fraction()});
    }
    for (const auto& [key, rec] : b_index) {
        if (!seen.contains(key)) {
            missing.push_back("(" + key.first + ", " + key.second + ") in run a");
        }
    }
    if (!missing.empty()) {
        throw KeyMismatch(std::move(missing));
    }
    return out;
}

}  // namespace spbench
