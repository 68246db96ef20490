#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spbench/csv.hpp"
#include "spbench/errors.hpp"
#include "spbench/harness.hpp"
#include "spbench/ingest.hpp"

using namespace spbench;
namespace fs = std::filesystem;

namespace {

struct Run {
    int rc;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "spbench");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {rc, out.str(), err.str()};
}

CsvDocument parse_csv(const std::string& text)
{
    std::istringstream in(text);
    return read_csv(in);
}

struct TempDir {
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() /
               ("spbench_cli_" + std::to_string(std::rand()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    std::string file(const std::string& name) const { return (path / name).string(); }

    void write(const std::string& name, std::string_view text) const
    {
        std::ofstream(path / name) << text;
    }
};

void write_matrix(const std::string& path, const CsrMatrix& m)
{
    std::ofstream out(path);
    write_matrix_market(out, csr_to_coo(m));
}

const char* const fixture_csv =
    "matrix,kernel,nnz,rows,cols,cov,status,reps,median_seconds,min_seconds,max_seconds,"
    "gflops,gbs\n"
    "p1,k1,10,5,5,0.1,ok,3,1,1,1,0,0\n"
    "p1,k2,10,5,5,0.1,ok,3,2,2,2,0,0\n"
    "p2,k1,10,5,5,0.5,ok,3,2,2,2,0,0\n"
    "p2,k2,10,5,5,0.5,ok,3,1,1,1,0,0\n"
    "p3,k1,10,5,5,2.0,ok,3,4,4,4,0,0\n"
    "p3,k2,10,5,5,2.0,ok,3,1,1,1,0,0\n";

}  // namespace

TEST_CASE("size list parsing")
{
    CHECK(parse_size_list("1MB,64MB") == std::vector<std::size_t>{1u << 20, 64u << 20});
    CHECK(parse_size_list("4096,2kib,1g") ==
          std::vector<std::size_t>{4096, 2048, std::size_t{1} << 30});
    CHECK_THROWS_AS(parse_size_list(""), InvalidArgument);
    CHECK_THROWS_AS(parse_size_list("1MB,"), InvalidArgument);
    CHECK_THROWS_AS(parse_size_list("12XB"), InvalidArgument);
    CHECK_THROWS_AS(parse_size_list("4"), InvalidArgument);
    CHECK(parse_kernel_list("all").size() == 7);
    CHECK_THROWS_AS(parse_kernel_list("csr,bogus"), InvalidArgument);
    CHECK(parse_solver_list("all").size() == 5);
}

TEST_CASE("stream command")
{
    const auto r = run({"stream", "--sizes", "64KB,128KB", "--reps", "3", "--warmup", "1"});
    REQUIRE(r.rc == 0);
    CHECK(r.out.rfind("# protocol: warmup=1 reps=3", 0) == 0);
    const auto doc = parse_csv(r.out);
    CHECK(doc.rows.size() == 10);
    const auto c = doc.column("verified");
    for (const auto& row : doc.rows) {
        CHECK(row.fields[c] == "true");
    }

    const auto j = run({"stream", "--sizes", "64KB", "--reps", "2", "--format", "json"});
    REQUIRE(j.rc == 0);
    const auto parsed = nlohmann::json::parse(j.out);
    REQUIRE(parsed["rows"].size() == 5);
    for (const auto& row : parsed["rows"]) {
        CHECK(row.size() == doc.header.size());
        for (const auto& col : doc.header) {
            CHECK(row.contains(col));
        }
    }
    CHECK(parsed["protocol"]["statistic"] == "median");

    CHECK(run({"stream", "--reps", "0"}).rc == 2);
    CHECK(run({"stream", "--sizes", "1QB"}).rc == 2);
    CHECK(run({"stream", "--format", "xml"}).rc == 2);
    CHECK(run({"bogus"}).rc == 2);
    CHECK(run({}).rc == 2);
}

TEST_CASE("spmv campaign")
{
    TempDir dir;
    fs::create_directories(dir.path / "corpus");
    write_matrix(dir.file("corpus/lap.mtx"), gen_laplacian_2d(10));
    const std::vector<index_t> skew{1, 1, 1, 1, 60, 1, 1, 1, 1, 1};
    write_matrix(dir.file("corpus/skew.mtx"), gen_random_rowdist(10, 60, skew, 4));
    write_matrix(dir.file("corpus/small.mtx"), gen_laplacian_2d(2));
    dir.write("corpus/broken.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 5\n");
    const auto corpus = dir.file("corpus");

    const auto r = run({"spmv", "--corpus", corpus, "--reps", "2", "--workers", "2"});
    REQUIRE(r.rc == 0);
    CHECK(r.err.find("broken.mtx") != std::string::npos);
    const auto doc = parse_csv(r.out);
    const std::vector<std::string_view> cols(std::begin(spmv_columns), std::end(spmv_columns));
    CHECK_NOTHROW(doc.require(cols));
    CHECK(doc.header.size() == cols.size());
    CHECK(doc.rows.size() == 21);
    const auto c_status = doc.column("status");
    const auto c_kernel = doc.column("kernel");
    const auto c_matrix = doc.column("matrix");
    std::size_t unsupported = 0;
    for (const auto& row : doc.rows) {
        CHECK(row.fields[c_status] != "failed");
        if (row.fields[c_status] == "unsupported") {
            ++unsupported;
            CHECK(row.fields[c_kernel] == "ell");
            CHECK(row.fields[c_matrix] == "skew");
        }
    }
    CHECK(unsupported == 1);

    // identical configuration gives the identical row order
    const auto again = parse_csv(run({"spmv", "--corpus", corpus, "--reps", "1"}).out);
    REQUIRE(again.rows.size() == doc.rows.size());
    for (std::size_t i = 0; i < doc.rows.size(); ++i) {
        CHECK(again.rows[i].fields[c_matrix] == doc.rows[i].fields[c_matrix]);
        CHECK(again.rows[i].fields[c_kernel] == doc.rows[i].fields[c_kernel]);
    }

    const auto filtered =
        run({"spmv", "--corpus", corpus, "--reps", "1", "--min-nnz", "100", "--kernels",
             "csr_classical,sell"});
    REQUIRE(filtered.rc == 0);
    const auto fdoc = parse_csv(filtered.out);
    CHECK(fdoc.rows.size() == 2);
    for (const auto& row : fdoc.rows) {
        CHECK(row.fields[c_matrix] == "lap");
    }

    CHECK(run({"spmv", "--corpus", corpus, "--min-nnz", "100000"}).rc == 1);
    CHECK(run({"spmv", "--corpus", dir.file("missing")}).rc == 1);
    CHECK(run({"spmv", "--corpus", corpus, "--kernels", "nope"}).rc == 2);
    CHECK(run({"spmv"}).rc == 2);

    const auto out_file = dir.file("records.json");
    CHECK(run({"spmv", "--corpus", corpus, "--reps", "1", "--format", "json", "--out",
               out_file})
              .rc == 0);
    std::ifstream in(out_file);
    const auto j = nlohmann::json::parse(in);
    CHECK(j["rows"].size() == 21);
}

TEST_CASE("solve command")
{
    TempDir dir;
    const auto lap = dir.file("lap64.mtx");
    write_matrix(lap, gen_laplacian_2d(8));
    const auto hist = dir.file("hist.csv");
    const auto r = run({"solve", "--matrix", lap, "--solver", "cg", "--tol", "1e-10",
                        "--residuals", hist});
    REQUIRE(r.rc == 0);
    const auto doc = parse_csv(r.out);
    const std::vector<std::string_view> cols(std::begin(solver_columns),
                                             std::end(solver_columns));
    CHECK_NOTHROW(doc.require(cols));
    REQUIRE(doc.rows.size() == 1);
    const auto recs = read_solver_records(doc);
    CHECK(recs[0].matrix == "lap64");
    CHECK(recs[0].converged);
    CHECK(recs[0].final_relres <= 1e-10);
    CHECK(recs[0].iterations <= 64);
    const auto h = read_csv_file(hist);
    CHECK(h.rows.size() == recs[0].iterations + 1);

    const auto all = run({"solve", "--matrix", lap, "--solver", "all"});
    REQUIRE(all.rc == 0);
    const auto solvers = read_solver_records(parse_csv(all.out));
    REQUIRE(solvers.size() == 5);
    CHECK(solvers[0].solver == "bicg");
    CHECK(solvers[4].solver == "gmres");

    const auto rect = dir.file("rect.mtx");
    std::ofstream(rect) << "%%MatrixMarket matrix coordinate real general\n2 3 1\n1 1 1\n";
    const auto bad = run({"solve", "--matrix", rect});
    CHECK(bad.rc == 1);
    CHECK(bad.err.find("square") != std::string::npos);
    CHECK(run({"solve", "--matrix", lap, "--solver", "minres"}).rc == 2);
    CHECK(run({"solve", "--matrix", lap, "--tol", "0"}).rc == 2);
    CHECK(run({"solve", "--matrix", dir.file("none.mtx")}).rc == 1);
}

TEST_CASE("profile and compare commands")
{
    TempDir dir;
    dir.write("fixture.csv", fixture_csv);
    const auto fixture = dir.file("fixture.csv");

    const auto p = run({"profile", fixture});
    REQUIRE(p.rc == 0);
    const auto doc = parse_csv(p.out);
    CHECK(doc.header == std::vector<std::string>{"kernel", "theta", "fraction"});
    std::map<std::pair<std::string, std::string>, double> v;
    for (const auto& row : doc.rows) {
        v[{row.fields[0], row.fields[1]}] = parse_double_field(row, 2, "fraction");
    }
    CHECK(v[{"k1", "1"}] == doctest::Approx(1.0 / 3));
    CHECK(v[{"k2", "1"}] == doctest::Approx(2.0 / 3));
    CHECK(v[{"k1", "2"}] == doctest::Approx(2.0 / 3));
    CHECK(v[{"k2", "2"}] == 1.0);
    CHECK(run({"profile", fixture}).out == p.out);

    const auto self = run({"compare", "--a", fixture, "--b", fixture});
    REQUIRE(self.rc == 0);
    const auto sdoc = parse_csv(self.out);
    CHECK(sdoc.rows.size() == 6);
    for (const auto& row : sdoc.rows) {
        CHECK(row.fields[sdoc.column("speedup")] == "1");
    }
    const auto cov = run({"compare", "--a", fixture, "--b", fixture, "--by-cov"});
    REQUIRE(cov.rc == 0);
    const auto cdoc = parse_csv(cov.out);
    CHECK(cdoc.rows.front().fields[cdoc.column("cov")] == "0.1");
    CHECK(cdoc.rows.back().fields[cdoc.column("cov")] == "2");

    std::string broken = fixture_csv;
    broken += "p4,k1,10\n";
    dir.write("broken.csv", broken);
    const auto b = run({"profile", dir.file("broken.csv")});
    CHECK(b.rc == 1);
    CHECK(b.err.find("line 8") != std::string::npos);

    dir.write("noschema.csv", "matrix,kernel,nnz\np1,k1,3\n");
    const auto s = run({"compare", "--a", dir.file("noschema.csv"), "--b", fixture});
    CHECK(s.rc == 1);
    CHECK(s.err.find("missing column rows") != std::string::npos);

    std::string partial = fixture_csv;
    partial.erase(partial.rfind("p3,k2"));
    dir.write("partial.csv", partial);
    const auto m = run({"compare", "--a", fixture, "--b", dir.file("partial.csv")});
    CHECK(m.rc == 1);
    CHECK(m.err.find("(p3, k2) in run b") != std::string::npos);

    // solver records compare by (matrix, solver)
    const auto lap = dir.file("lap.mtx");
    write_matrix(lap, gen_laplacian_2d(6));
    const auto sa = dir.file("sa.csv");
    REQUIRE(run({"solve", "--matrix", lap, "--solver", "all", "--out", sa}).rc == 0);
    const auto sc = run({"compare", "--a", sa, "--b", sa});
    REQUIRE(sc.rc == 0);
    const auto scdoc = parse_csv(sc.out);
    CHECK(scdoc.rows.size() == 5);
    CHECK(scdoc.has_column("spmv_fraction_a"));
}

TEST_CASE("generate command")
{
    const auto r = run({"generate", "laplacian", "--n", "3"});
    REQUIRE(r.rc == 0);
    std::istringstream in(r.out);
    const auto mm = read_matrix_market(in);
    CHECK(mm.matrix.dims.num_rows == 9);
    CHECK(mm.matrix.dims.nnz == 33);
    CHECK(run({"generate", "spiral"}).rc == 2);
    CHECK(run({"generate", "uniform"}).rc == 2);
    const auto p = run({"generate", "powerlaw", "--rows", "50", "--mean-nnz", "5"});
    CHECK(p.rc == 0);
}

TEST_CASE("csv reader")
{
    const auto doc = parse_csv("# comment\n\na,b\n\"x,1\",\"say \"\"hi\"\"\"\n");
    REQUIRE(doc.rows.size() == 1);
    CHECK(doc.header_line == 3);
    CHECK(doc.rows[0].fields[0] == "x,1");
    CHECK(doc.rows[0].fields[1] == "say \"hi\"");
    CHECK(doc.rows[0].line == 4);
    try {
        doc.column("c");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseErrorKind::schema_mismatch);
        CHECK(std::string(e.what()).find("missing column c") != std::string::npos);
    }
    try {
        parse_csv("a,b\n1,2\n3\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_csv("# only a comment\n"), ParseError);
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(INFINITY) == "inf");
    const auto d = parse_csv("v\ninf\nabc\n");
    CHECK(std::isinf(parse_double_field(d.rows[0], 0, "v")));
    CHECK_THROWS_AS(parse_double_field(d.rows[1], 0, "v"), ParseError);
}
