#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spbench/errors.hpp"
#include "spbench/stream.hpp"
#include "spbench/timing.hpp"

using namespace spbench;

TEST_CASE("moved bytes accounting")
{
    const std::size_t bytes = 8u << 20;  // 2^20 doubles
    CHECK(moved_bytes(StreamKernel::add, bytes) == 25165824u);
    CHECK(moved_bytes(StreamKernel::triad, bytes) == 3 * bytes);
    CHECK(moved_bytes(StreamKernel::copy, bytes) == 2 * bytes);
    CHECK(moved_bytes(StreamKernel::mul, bytes) == 2 * bytes);
    CHECK(moved_bytes(StreamKernel::dot, bytes) == 2 * bytes);
}

TEST_CASE("kernel semantics")
{
    StreamArrays arr(100, 3);
    CHECK(arr.check(1.0, 2.0, 0.0));
    arr.run(StreamKernel::triad, 3.0);
    CHECK(arr.check(2.0, 2.0, 0.0));  // a = 2 + 3 * 0

    std::vector<double> a{1, 2};
    std::vector<double> b{3, 4};
    CHECK(stream_dot(a, b) == 11.0);
    CHECK(stream_dot(a, b, 4) == 11.0);

    std::vector<double> c(2);
    stream_copy(a, c);
    CHECK(c == a);
    stream_mul(a, c, 0.5);
    CHECK(c == std::vector<double>{0.5, 1.0});
    stream_add(a, b, c);
    CHECK(c == std::vector<double>{4, 6});
    stream_triad(a, b, c, 2.0);
    CHECK(c == std::vector<double>{7, 10});
    std::vector<double> short_vec(1);
    CHECK_THROWS_AS(stream_copy(a, short_vec), DimensionMismatch);
}

TEST_CASE("run_stream verifies against the closed form")
{
    for (auto k : all_stream_kernels) {
        CAPTURE(to_string(k));
        const auto r = run_stream(k, 10000, {5, 2, 3.0, 2});
        CHECK(r.kernel == k);
        CHECK(r.reps == 5);
        CHECK(r.times.size() == 5);
        CHECK(r.array_bytes == 80000);
        CHECK(r.verified);
        CHECK(r.bandwidth_gbs > 0.0);
        CHECK(std::isfinite(r.bandwidth_gbs));
        CHECK(r.bandwidth_gbs ==
              doctest::Approx(static_cast<double>(moved_bytes(k, r.array_bytes)) /
                              r.median_seconds / 1e9));
        CHECK(r.min_seconds <= r.median_seconds);
        CHECK(r.median_seconds <= r.max_seconds);
    }
    CHECK_THROWS_AS(run_stream(StreamKernel::copy, 0), InvalidArgument);
    CHECK_THROWS_AS(run_stream(StreamKernel::copy, 10, {0}), InvalidArgument);
}

TEST_CASE("stream_sweep cardinality and order")
{
    const std::vector<std::size_t> sizes{1u << 12, 1u << 16};
    const auto rs = stream_sweep(sizes, {10, 1, stream_default_scalar, 2});
    REQUIRE(rs.size() == 10);
    for (std::size_t i = 0; i < rs.size(); ++i) {
        CHECK(rs[i].array_bytes == sizes[i / 5]);
        CHECK(rs[i].kernel == all_stream_kernels[i % 5]);
        CHECK(rs[i].times.size() == 10);
        CHECK(rs[i].verified);
    }
    CHECK_THROWS_AS(stream_sweep(std::vector<std::size_t>{}, {}), InvalidArgument);
    CHECK_THROWS_AS(stream_sweep(std::vector<std::size_t>{4}, {}), InvalidArgument);
}

TEST_CASE("bandwidth_ratio")
{
    const std::vector<std::size_t> sizes{1u << 14};
    const auto run = stream_sweep(sizes, {3});
    for (const auto& r : bandwidth_ratio(run, run)) {
        CHECK(r.ratio == 1.0);
    }

    std::vector<StreamResult> a(1);
    std::vector<StreamResult> b(1);
    a[0].kernel = b[0].kernel = StreamKernel::triad;
    a[0].array_bytes = b[0].array_bytes = 8200;
    a[0].bandwidth_gbs = 1400.0;
    b[0].bandwidth_gbs = 820.0;
    const auto ratio = bandwidth_ratio(a, b);
    REQUIRE(ratio.size() == 1);
    CHECK(ratio[0].ratio == doctest::Approx(1.7073).epsilon(1e-4));

    b[0].kernel = StreamKernel::copy;
    try {
        bandwidth_ratio(a, b);
        FAIL("expected KeyMismatch");
    } catch (const KeyMismatch& e) {
        REQUIRE(e.missing().size() == 2);
        CHECK(e.missing()[0] == "(triad, 8200) in run b");
        CHECK(e.missing()[1] == "(copy, 8200) in run a");
    }
}

TEST_CASE("timing summary")
{
    const std::vector<double> t{5, 1, 3, 100, 2};
    const auto s = summarize(t);
    CHECK(s.median == 3.0);
    CHECK(s.min == 1.0);
    CHECK(s.max == 100.0);
    CHECK(s.mad == 2.0);  // deviations sorted: 0, 1, 2, 2, 97
}
