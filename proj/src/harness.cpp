#include "spbench/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <ostream>
#include <random>
#include <set>

#include "spbench/errors.hpp"
#include "spbench/ingest.hpp"
#include "spbench/stream.hpp"
#include "spbench/timing.hpp"

namespace spbench {
namespace {

std::vector<std::string_view> split(std::string_view text, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        out.push_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

std::string lower(std::string_view s)
{
    std::string out(s);
    for (auto& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

Protocol timing_protocol(const HarnessConfig& cfg)
{
    return {{"warmup", std::to_string(cfg.warmup)},
            {"reps", std::to_string(cfg.reps)},
            {"workers", std::to_string(cfg.workers)},
            {"statistic", "median"},
            {"seed", std::to_string(cfg.seed)}};
}

int emit(const Table& table, const HarnessConfig& cfg, const Protocol& protocol,
         std::ostream& out, std::ostream& err)
{
    if (cfg.out.empty()) {
        write_table(out, table, cfg.format, protocol);
        return out ? exit_ok : exit_failure;
    }
    std::ofstream file(cfg.out);
    if (!file) {
        err << "error: cannot write " << cfg.out << '\n';
        return exit_failure;
    }
    write_table(file, table, cfg.format, protocol);
    if (!file) {
        err << "error: write to " << cfg.out << " failed\n";
        return exit_failure;
    }
    return exit_ok;
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view id)
{
    // FNV-1a over the id, so each matrix gets its own stable input vector
    std::uint64_t h = 1469598103934665603ull ^ seed;
    for (unsigned char c : id) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Largest |y - ref| relative to sum_j |a_ij x_j| over all rows.
double max_scaled_error(const CsrMatrix& a, std::span<const double> x, std::span<const double> y,
                        std::span<const double> ref)
{
    double worst = 0.0;
    for (index_t i = 0; i < a.dims.num_rows; ++i) {
        double scale = 0.0;
        for (auto k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            scale += std::fabs(a.values[k] * x[a.col_idx[k]]);
        }
        const double e = std::fabs(y[i] - ref[i]);
        if (!(e <= 0.0)) {
            worst = std::max(worst, scale > 0.0 ? e / scale : INFINITY);
        }
    }
    return worst;
}

constexpr double verify_tolerance = 1e-10;

std::vector<Cell> spmv_row(const CorpusEntry& e, SpmvKernel k, std::string_view status,
                           std::size_t reps, const TimingSummary& t)
{
    const auto nnz = static_cast<double>(e.dims.nnz);
    const bool ok = status == "ok";
    const double median = ok ? t.median : INFINITY;
    return {e.id,
            std::string(to_string(k)),
            std::uint64_t{e.dims.nnz},
            std::uint64_t{e.dims.num_rows},
            std::uint64_t{e.dims.num_cols},
            e.stats.cov,
            std::string(status),
            std::uint64_t{ok ? reps : 0},
            median,
            ok ? t.min : INFINITY,
            ok ? t.max : INFINITY,
            ok && median > 0.0 ? 2.0 * nnz / median / 1e9 : 0.0,
            ok && median > 0.0 ? csr_bytes_per_nnz * nnz / median / 1e9 : 0.0};
}

Table table_with(std::span<const std::string_view> columns)
{
    Table t;
    for (auto c : columns) {
        t.columns.emplace_back(c);
    }
    return t;
}

Table table_with(std::initializer_list<std::string_view> columns)
{
    return table_with(std::span<const std::string_view>(columns.begin(), columns.size()));
}

index_t pareto_row(std::mt19937_64& rng, double mean, index_t cols)
{
    // Pareto with shape 1.5 has mean 3 * xm
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double xm = mean / 3.0;
    const double draw = xm * std::pow(1.0 - u(rng), -1.0 / 1.5);
    return std::clamp<index_t>(static_cast<index_t>(draw), 1, cols);
}

}  // namespace

std::size_t default_workers()
{
    return static_cast<std::size_t>(std::max(omp_get_max_threads(), 1));
}

std::vector<std::size_t> parse_size_list(std::string_view text)
{
    if (text.empty()) {
        throw InvalidArgument("size list is empty");
    }
    std::vector<std::size_t> out;
    for (auto item : split(text, ',')) {
        std::size_t value = 0;
        const auto* end = item.data() + item.size();
        const auto res = std::from_chars(item.data(), end, value);
        if (res.ec != std::errc() || res.ptr == item.data()) {
            throw InvalidArgument("invalid size '" + std::string(item) + "'");
        }
        const auto suffix = lower(std::string_view(res.ptr, end - res.ptr));
        std::size_t mult = 0;
        if (suffix.empty() || suffix == "b") {
            mult = 1;
        } else if (suffix == "k" || suffix == "kb" || suffix == "kib") {
            mult = std::size_t{1} << 10;
        } else if (suffix == "m" || suffix == "mb" || suffix == "mib") {
            mult = std::size_t{1} << 20;
        } else if (suffix == "g" || suffix == "gb" || suffix == "gib") {
            mult = std::size_t{1} << 30;
        } else {
            throw InvalidArgument("invalid size suffix in '" + std::string(item) + "'");
        }
        if (value == 0 || value * mult < sizeof(double)) {
            throw InvalidArgument("size '" + std::string(item) + "' holds no double");
        }
        out.push_back(value * mult);
    }
    return out;
}

std::vector<SpmvKernel> parse_kernel_list(std::string_view text)
{
    if (text == "all") {
        return {all_spmv_kernels.begin(), all_spmv_kernels.end()};
    }
    std::vector<SpmvKernel> out;
    for (auto item : split(text, ',')) {
        const auto k = parse_spmv_kernel(item);
        if (!k) {
            throw InvalidArgument("unknown kernel '" + std::string(item) + "'");
        }
        out.push_back(*k);
    }
    return out;
}

std::vector<Solver> parse_solver_list(std::string_view text)
{
    if (text == "all") {
        return {all_solvers.begin(), all_solvers.end()};
    }
    std::vector<Solver> out;
    for (auto item : split(text, ',')) {
        const auto s = parse_solver(item);
        if (!s) {
            throw InvalidArgument("unknown solver '" + std::string(item) + "'");
        }
        out.push_back(*s);
    }
    return out;
}

int cmd_stream(const std::vector<std::size_t>& sizes, const HarnessConfig& cfg,
               std::ostream& out, std::ostream& err)
{
    StreamOptions opts;
    opts.reps = cfg.reps;
    opts.warmup = cfg.warmup;
    opts.workers = cfg.workers;
    const auto results = stream_sweep(sizes, opts);
    auto table = table_with({
        "kernel", "array_bytes", "reps", "median_seconds", "min_seconds", "max_seconds",
        "mad_seconds", "bandwidth_gbs", "verified"});
    bool all_verified = true;
    for (const auto& r : results) {
        const auto s = summarize(r.times);
        table.rows.push_back({std::string(to_string(r.kernel)), std::uint64_t{r.array_bytes},
                              std::uint64_t{r.reps}, r.median_seconds, r.min_seconds,
                              r.max_seconds, s.mad, r.bandwidth_gbs, r.verified});
        all_verified = all_verified && r.verified;
    }
    auto protocol = timing_protocol(cfg);
    protocol.emplace_back("scalar", format_double(opts.scalar));
    const int rc = emit(table, cfg, protocol, out, err);
    if (!all_verified) {
        err << "error: stream results differ from the closed-form values\n";
        return exit_failure;
    }
    return rc;
}

int cmd_spmv(const SpmvCampaign& campaign, const HarnessConfig& cfg, std::ostream& out,
             std::ostream& err)
{
    const auto scan = scan_corpus(campaign.corpus, cfg.workers);
    for (const auto& s : scan.skipped) {
        err << "skip " << s.path.string() << ": " << s.reason << '\n';
    }
    std::vector<const CorpusEntry*> selected;
    for (const auto& e : scan.entries) {
        if (e.dims.nnz < cfg.min_nnz) {
            continue;
        }
        if (cfg.real_only && e.header.field == MmField::pattern) {
            continue;
        }
        selected.push_back(&e);
    }
    if (selected.empty()) {
        err << "error: no matrices in " << campaign.corpus << " after filtering\n";
        return exit_failure;
    }

    ExecPolicy policy;
    policy.workers = cfg.workers;
    FormatOptions formats;
    formats.max_blowup = campaign.max_blowup;
    auto table = table_with(spmv_columns);

    for (const auto* e : selected) {
        CsrMatrix a;
        try {
            a = coo_to_csr(read_matrix_market_file(e->path).matrix);
        } catch (const std::exception& ex) {
            err << "skip " << e->id << ": " << ex.what() << '\n';
            continue;
        }
        std::mt19937_64 rng(mix_seed(cfg.seed, e->id));
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        DenseVector x(a.dims.num_cols);
        for (auto& v : x) {
            v = dist(rng);
        }
        DenseVector ref(a.dims.num_rows);
        spmv_csr_classical(a, x, ref, {}, {});
        DenseVector y(a.dims.num_rows);

        for (auto kernel : campaign.kernels) {
            try {
                const SpmvOperator op(a, kernel, policy, formats);
                for (std::size_t w = 0; w < cfg.warmup; ++w) {
                    op.apply(x, y);
                }
                std::vector<double> times;
                times.reserve(cfg.reps);
                for (std::size_t r = 0; r < cfg.reps; ++r) {
                    const auto t0 = Clock::now();
                    op.apply(x, y);
                    times.push_back(seconds_since(t0));
                }
                const double error = max_scaled_error(a, x, y, ref);
                const bool correct = error <= verify_tolerance;
                if (!correct) {
                    err << "fail " << e->id << " " << to_string(kernel)
                        << ": result differs from csr_classical by " << error << '\n';
                }
                table.rows.push_back(
                    spmv_row(*e, kernel, correct ? "ok" : "failed", cfg.reps, summarize(times)));
            } catch (const ConversionRefused& ex) {
                table.rows.push_back(spmv_row(*e, kernel, "unsupported", 0, {}));
            } catch (const std::exception& ex) {
                err << "fail " << e->id << " " << to_string(kernel) << ": " << ex.what() << '\n';
                table.rows.push_back(spmv_row(*e, kernel, "failed", 0, {}));
            }
        }
    }
    auto protocol = timing_protocol(cfg);
    protocol.emplace_back("bytes_per_nnz", format_double(csr_bytes_per_nnz));
    return emit(table, cfg, protocol, out, err);
}

int cmd_solve(const SolveOptions& opts, const HarnessConfig& cfg, std::ostream& out,
              std::ostream& err)
{
    CsrMatrix a;
    try {
        a = coo_to_csr(read_matrix_market_file(opts.matrix).matrix);
    } catch (const std::exception& ex) {
        err << "error: " << opts.matrix << ": " << ex.what() << '\n';
        return exit_failure;
    }
    if (a.dims.num_rows != a.dims.num_cols) {
        err << "error: " << opts.matrix << " is " << a.dims.num_rows << "x" << a.dims.num_cols
            << ", solvers need a square matrix\n";
        return exit_failure;
    }
    const auto n = a.dims.num_rows;
    const DenseVector ones(n, 1.0);
    DenseVector b(n);
    spmv_csr_classical(a, ones, b, {}, {});
    const DenseVector x0(n, 0.0);
    const auto id = std::filesystem::path(opts.matrix).stem().string();

    auto table = table_with(solver_columns);
    Table residuals = table_with({
        "solver", "iteration", "residual"});
    for (auto s : opts.solvers) {
        SolverConfig sc;
        sc.solver = s;
        sc.rel_tol = opts.tol;
        sc.max_iters = opts.max_iters;
        sc.gmres_restart = opts.restart;
        sc.kernel = opts.kernel;
        sc.exec.workers = cfg.workers;
        SolveResult r;
        try {
            r = solve(a, b, x0, sc);
        } catch (const std::exception& ex) {
            err << "error: " << to_string(s) << ": " << ex.what() << '\n';
            return exit_failure;
        }
        if (r.breakdown) {
            err << "note: " << to_string(s) << " broke down on " << *r.breakdown << '\n';
        }
        const auto& t = r.component_times;
        table.rows.push_back({id, std::string(to_string(s)), std::string(to_string(opts.kernel)),
                              std::uint64_t{r.iterations}, r.converged, r.final_relres(),
                              r.total_seconds, t.spmv, t.orthogonalization, t.vector_updates});
        for (std::size_t k = 0; k < r.residual_history.size(); ++k) {
            residuals.rows.push_back(
                {std::string(to_string(s)), std::uint64_t{k}, r.residual_history[k]});
        }
    }
    if (!opts.residuals.empty()) {
        std::ofstream file(opts.residuals);
        if (!file) {
            err << "error: cannot write " << opts.residuals << '\n';
            return exit_failure;
        }
        write_table(file, residuals, OutputFormat::csv);
    }
    Protocol protocol{{"workers", std::to_string(cfg.workers)},
                      {"tol", format_double(opts.tol)},
                      {"max_iters", std::to_string(opts.max_iters)},
                      {"restart", std::to_string(opts.restart)},
                      {"rhs", "A*ones"},
                      {"x0", "zero"}};
    return emit(table, cfg, protocol, out, err);
}

std::vector<BenchRecord> read_bench_records(const CsvDocument& doc)
{
    doc.require(spmv_columns);
    const auto c_matrix = doc.column("matrix");
    const auto c_kernel = doc.column("kernel");
    const auto c_nnz = doc.column("nnz");
    const auto c_status = doc.column("status");
    const auto c_median = doc.column("median_seconds");
    std::vector<BenchRecord> out;
    out.reserve(doc.rows.size());
    for (const auto& row : doc.rows) {
        BenchRecord r;
        r.matrix = row.fields[c_matrix];
        r.kernel = row.fields[c_kernel];
        r.nnz = parse_count_field(row, c_nnz, "nnz");
        const double t = parse_double_field(row, c_median, "median_seconds");
        r.median_seconds = row.fields[c_status] == "ok" ? t : INFINITY;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<SolverRunRecord> read_solver_records(const CsvDocument& doc)
{
    doc.require(solver_columns);
    std::vector<std::size_t> c;
    for (auto name : solver_columns) {
        c.push_back(doc.column(name));
    }
    std::vector<SolverRunRecord> out;
    for (const auto& row : doc.rows) {
        SolverRunRecord r;
        r.matrix = row.fields[c[0]];
        r.solver = row.fields[c[1]];
        r.kernel = row.fields[c[2]];
        r.iterations = parse_count_field(row, c[3], solver_columns[3]);
        r.converged = parse_bool_field(row, c[4], solver_columns[4]);
        r.final_relres = parse_double_field(row, c[5], solver_columns[5]);
        r.seconds_total = parse_double_field(row, c[6], solver_columns[6]);
        r.seconds_spmv = parse_double_field(row, c[7], solver_columns[7]);
        r.seconds_ortho = parse_double_field(row, c[8], solver_columns[8]);
        r.seconds_axpy = parse_double_field(row, c[9], solver_columns[9]);
        out.push_back(std::move(r));
    }
    return out;
}

int cmd_profile(const std::vector<std::string>& inputs, const HarnessConfig& cfg,
                std::ostream& out, std::ostream& err)
{
    std::vector<BenchRecord> records;
    for (const auto& path : inputs) {
        try {
            const auto recs = read_bench_records(read_csv_file(path));
            records.insert(records.end(), recs.begin(), recs.end());
        } catch (const ParseError& ex) {
            err << "error: " << path << ": " << ex.what() << '\n';
            return exit_failure;
        }
    }
    std::vector<std::string> kernels;
    std::vector<std::string> problems;
    std::set<std::string> seen_k;
    std::set<std::string> seen_p;
    for (const auto& r : records) {
        if (seen_k.insert(r.kernel).second) {
            kernels.push_back(r.kernel);
        }
        if (seen_p.insert(r.matrix).second) {
            problems.push_back(r.matrix);
        }
    }
    if (problems.empty()) {
        err << "error: no records to profile\n";
        return exit_failure;
    }
    auto table = table_with({"kernel", "theta", "fraction"});
    try {
        const auto prof = performance_profile(records, kernels, problems);
        for (const auto& p : prof.points()) {
            table.rows.push_back({p.kernel, p.theta, p.fraction});
        }
    } catch (const Error& ex) {
        err << "error: " << ex.what() << '\n';
        return exit_failure;
    }
    return emit(table, cfg, {}, out, err);
}

int cmd_compare(const std::string& file_a, const std::string& file_b, bool by_cov,
                const HarnessConfig& cfg, std::ostream& out, std::ostream& err)
{
    CsvDocument a;
    CsvDocument b;
    for (auto [path, doc] : {std::pair{&file_a, &a}, std::pair{&file_b, &b}}) {
        try {
            *doc = read_csv_file(*path);
        } catch (const ParseError& ex) {
            err << "error: " << *path << ": " << ex.what() << '\n';
            return exit_failure;
        }
    }
    const bool solver_schema = a.has_column("solver");
    std::string current = file_a;
    try {
        if (solver_schema) {
            const auto ra = read_solver_records(a);
            current = file_b;
            const auto rb = read_solver_records(b);
            auto table = table_with({
                "matrix", "solver", "speedup", "spmv_fraction_a", "spmv_fraction_b"});
            for (const auto& s : solver_speedup_report(ra, rb)) {
                table.rows.push_back(
                    {s.matrix, s.solver, s.speedup, s.spmv_fraction_a, s.spmv_fraction_b});
            }
            return emit(table, cfg, {}, out, err);
        }
        const auto ra = read_bench_records(a);
        current = file_b;
        const auto rb = read_bench_records(b);
        if (by_cov) {
            std::map<std::string, RowStats> stats;
            const auto c_cov = a.column("cov");
            const auto c_matrix = a.column("matrix");
            for (const auto& row : a.rows) {
                stats[row.fields[c_matrix]].cov = parse_double_field(row, c_cov, "cov");
            }
            auto table = table_with(
                std::initializer_list<std::string_view>{"matrix", "kernel", "cov", "speedup"});
            for (const auto& p : cov_correlation(ra, rb, stats)) {
                table.rows.push_back({p.matrix, p.kernel, p.cov, p.speedup});
            }
            return emit(table, cfg, {}, out, err);
        }
        auto table = table_with(
            std::initializer_list<std::string_view>{"matrix", "kernel", "nnz", "speedup"});
        for (const auto& p : speedup_scatter(ra, rb)) {
            table.rows.push_back({p.matrix, p.kernel, std::uint64_t{p.nnz}, p.speedup});
        }
        return emit(table, cfg, {}, out, err);
    } catch (const ParseError& ex) {
        err << "error: " << current << ": " << ex.what() << '\n';
        return exit_failure;
    } catch (const KeyMismatch& ex) {
        err << "error: runs do not match, " << ex.what() << '\n';
        return exit_failure;
    }
}

int cmd_generate(const GenerateOptions& opts, std::ostream& out, std::ostream& err)
{
    CsrMatrix m;
    try {
        if (opts.kind == "laplacian") {
            m = gen_laplacian_2d(opts.n);
        } else if (opts.kind == "uniform" || opts.kind == "powerlaw") {
            const auto rows = opts.rows;
            const auto cols = opts.cols == 0 ? rows : opts.cols;
            if (rows == 0 || cols == 0) {
                throw InvalidArgument("--rows must be positive");
            }
            std::mt19937_64 rng(opts.seed);
            std::vector<index_t> row_nnz(rows);
            std::uniform_int_distribution<index_t> flat(
                0, std::min<index_t>(cols, static_cast<index_t>(2.0 * opts.mean_nnz)));
            for (auto& r : row_nnz) {
                r = opts.kind == "uniform" ? flat(rng) : pareto_row(rng, opts.mean_nnz, cols);
            }
            m = gen_random_rowdist(rows, cols, row_nnz, rng());
        } else if (opts.kind == "arrow") {
            if (opts.n == 0) {
                throw InvalidArgument("--n must be positive");
            }
            std::vector<Triplet> t;
            for (index_t j = 0; j < opts.n; ++j) {
                t.push_back({0, j, j == 0 ? 4.0 : 1.0 / static_cast<double>(opts.n)});
            }
            for (index_t i = 1; i < opts.n; ++i) {
                t.push_back({i, i, 4.0});
            }
            m = coo_to_csr(coo_from_triplets(std::move(t), opts.n, opts.n));
        } else {
            err << "error: unknown matrix kind '" << opts.kind << "'\n";
            return exit_usage;
        }
    } catch (const InvalidArgument& ex) {
        err << "error: " << ex.what() << '\n';
        return exit_usage;
    }
    if (opts.out.empty()) {
        write_matrix_market(out, csr_to_coo(m));
        return exit_ok;
    }
    std::ofstream file(opts.out);
    if (!file) {
        err << "error: cannot write " << opts.out << '\n';
        return exit_failure;
    }
    write_matrix_market(file, csr_to_coo(m));
    return file ? exit_ok : exit_failure;
}

}  // namespace spbench
