#include <CLI11.hpp>

#include <ostream>

#include "spbench/errors.hpp"
#include "spbench/harness.hpp"

namespace spbench {
namespace {

void add_common(CLI::App* cmd, HarnessConfig& cfg, std::string& format, bool timing)
{
    if (timing) {
        cmd->add_option("--warmup", cfg.warmup, "untimed reps before measuring")
            ->capture_default_str();
        cmd->add_option("--reps", cfg.reps, "timed reps")->capture_default_str();
    }
    cmd->add_option("--workers", cfg.workers, "worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--out", cfg.out, "output file (default stdout)");
}

void finish_config(HarnessConfig& cfg, const std::string& format)
{
    cfg.format = *parse_output_format(format);
    if (cfg.reps == 0) {
        throw InvalidArgument("--reps must be at least 1");
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Sparse kernel and solver benchmarks", "spbench"};
    app.require_subcommand(1);
    HarnessConfig cfg;
    std::string format = "csv";

    auto* stream = app.add_subcommand("stream", "STREAM bandwidth sweep");
    std::string sizes = "1MB,16MB,128MB";
    stream->add_option("--sizes", sizes, "array sizes, e.g. 1MB,64MB")->capture_default_str();
    add_common(stream, cfg, format, true);

    auto* spmv = app.add_subcommand("spmv", "time SpMV kernels over a corpus");
    SpmvCampaign campaign;
    std::string kernels = "all";
    spmv->add_option("--corpus", campaign.corpus, "directory of .mtx files")->required();
    spmv->add_option("--kernels", kernels, "comma-separated kernel ids or all")
        ->capture_default_str();
    spmv->add_option("--min-nnz", cfg.min_nnz, "skip matrices with fewer nonzeros");
    spmv->add_flag("--real-only", cfg.real_only, "skip pattern matrices");
    spmv->add_option("--seed", cfg.seed, "input vector seed")->capture_default_str();
    spmv->add_option("--max-blowup", campaign.max_blowup, "ELL padding limit")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_common(spmv, cfg, format, true);

    auto* solve = app.add_subcommand("solve", "run Krylov solvers on one matrix");
    SolveOptions solve_opts;
    std::string solvers = "cg";
    std::string kernel = "csr_classical";
    solve->add_option("--matrix", solve_opts.matrix, "Matrix Market file")->required();
    solve->add_option("--solver", solvers, "solver ids or all")->capture_default_str();
    solve->add_option("--tol", solve_opts.tol, "relative residual target")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    solve->add_option("--max-iters", solve_opts.max_iters, "iteration cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    solve->add_option("--restart", solve_opts.restart, "GMRES restart length")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    solve->add_option("--kernel", kernel, "SpMV kernel id")->capture_default_str();
    solve->add_option("--residuals", solve_opts.residuals, "write residual histories here");
    add_common(solve, cfg, format, false);

    auto* profile = app.add_subcommand("profile", "performance profile of spmv records");
    std::vector<std::string> inputs;
    profile->add_option("inputs", inputs, "spmv CSV files")->required();
    add_common(profile, cfg, format, false);

    auto* compare = app.add_subcommand("compare", "ratio table of two runs");
    std::string file_a;
    std::string file_b;
    bool by_cov = false;
    compare->add_option("--a", file_a, "run a (reference)")->required();
    compare->add_option("--b", file_b, "run b")->required();
    compare->add_flag("--by-cov", by_cov, "join spmv ratios with row-length cov");
    add_common(compare, cfg, format, false);

    auto* generate = app.add_subcommand("generate", "write a synthetic matrix");
    GenerateOptions gen;
    generate->add_option("kind", gen.kind, "laplacian, uniform, powerlaw or arrow")->required();
    generate->add_option("--n", gen.n, "grid or matrix size")->capture_default_str();
    generate->add_option("--rows", gen.rows, "rows of a random matrix");
    generate->add_option("--cols", gen.cols, "columns (default rows)");
    generate->add_option("--mean-nnz", gen.mean_nnz, "mean nonzeros per row")
        ->capture_default_str();
    generate->add_option("--seed", gen.seed)->capture_default_str();
    generate->add_option("--out", gen.out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        if (!app.get_subcommands().empty()) {
            err << app.get_subcommands().front()->help();
        } else {
            err << app.help();
        }
        return exit_usage;
    }

    try {
        if (*generate) {
            return cmd_generate(gen, out, err);
        }
        finish_config(cfg, format);
        if (*stream) {
            return cmd_stream(parse_size_list(sizes), cfg, out, err);
        }
        if (*spmv) {
            campaign.kernels = parse_kernel_list(kernels);
            return cmd_spmv(campaign, cfg, out, err);
        }
        if (*solve) {
            solve_opts.solvers = parse_solver_list(solvers);
            const auto k = parse_spmv_kernel(kernel);
            if (!k) {
                throw InvalidArgument("unknown kernel '" + kernel + "'");
            }
            solve_opts.kernel = *k;
            return cmd_solve(solve_opts, cfg, out, err);
        }
        if (*profile) {
            return cmd_profile(inputs, cfg, out, err);
        }
        if (*compare) {
            return cmd_compare(file_a, file_b, by_cov, cfg, out, err);
        }
    } catch (const InvalidArgument& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_usage;
}

}  // namespace spbench
