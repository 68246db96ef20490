#include "spbench/stream.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "spbench/errors.hpp"
#include "spbench/timing.hpp"

namespace spbench {
namespace {

int threads(std::size_t workers)
{
    return static_cast<int>(std::max<std::size_t>(workers, 1));
}

void check_len(std::size_t a, std::size_t b)
{
    if (a != b) {
        throw DimensionMismatch("stream arrays differ in length: " + std::to_string(a) +
                                " vs " + std::to_string(b));
    }
}

/// Scalar replay of the kernels, used as the closed-form reference.
struct Gold {
    double a = stream_init_a;
    double b = stream_init_b;
    double c = stream_init_c;

    void apply(StreamKernel k, double s)
    {
        switch (k) {
        case StreamKernel::copy:
            c = a;
            break;
        case StreamKernel::mul:
            b = s * c;
            break;
        case StreamKernel::add:
            c = a + b;
            break;
        case StreamKernel::triad:
            a = b + s * c;
            break;
        case StreamKernel::dot:
            break;
        }
    }
};

constexpr double dot_tolerance = 1e-8;

bool dot_matches(double got, const Gold& g, std::size_t n)
{
    const double want = static_cast<double>(n) * g.a * g.b;
    return std::fabs(got - want) <= dot_tolerance * std::fabs(want);
}

StreamResult finish(StreamKernel k, std::size_t len, std::vector<double> times)
{
    StreamResult r;
    r.kernel = k;
    r.array_bytes = len * sizeof(double);
    r.reps = times.size();
    const auto s = summarize(times);
    r.times = std::move(times);
    r.median_seconds = s.median;
    r.min_seconds = s.min;
    r.max_seconds = s.max;
    r.bandwidth_gbs =
        static_cast<double>(moved_bytes(k, r.array_bytes)) / r.median_seconds / 1e9;
    return r;
}

}  // namespace

std::string_view to_string(StreamKernel k) noexcept
{
    switch (k) {
    case StreamKernel::copy:
        return "copy";
    case StreamKernel::mul:
        return "mul";
    case StreamKernel::add:
        return "add";
    case StreamKernel::triad:
        return "triad";
    case StreamKernel::dot:
        return "dot";
    }
    return "unknown";
}

std::optional<StreamKernel> parse_stream_kernel(std::string_view name) noexcept
{
    for (auto k : all_stream_kernels) {
        if (to_string(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

std::size_t moved_bytes(StreamKernel k, std::size_t array_bytes) noexcept
{
    switch (k) {
    case StreamKernel::add:
    case StreamKernel::triad:
        return 3 * array_bytes;
    case StreamKernel::copy:
    case StreamKernel::mul:
    case StreamKernel::dot:
        return 2 * array_bytes;
    }
    return 0;
}

void stream_copy(std::span<const double> a, std::span<double> c, std::size_t workers)
{
    check_len(a.size(), c.size());
    const auto n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for schedule(static) num_threads(threads(workers))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        c[i] = a[i];
    }
}

void stream_mul(std::span<const double> c, std::span<double> b, double scalar,
                std::size_t workers)
{
    check_len(c.size(), b.size());
    const auto n = static_cast<std::ptrdiff_t>(c.size());
#pragma omp parallel for schedule(static) num_threads(threads(workers))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        b[i] = scalar * c[i];
    }
}

void stream_add(std::span<const double> a, std::span<const double> b, std::span<double> c,
                std::size_t workers)
{
    check_len(a.size(), b.size());
    check_len(a.size(), c.size());
    const auto n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for schedule(static) num_threads(threads(workers))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        c[i] = a[i] + b[i];
    }
}

void stream_triad(std::span<const double> b, std::span<const double> c, std::span<double> a,
                  double scalar, std::size_t workers)
{
    check_len(b.size(), c.size());
    check_len(b.size(), a.size());
    const auto n = static_cast<std::ptrdiff_t>(b.size());
#pragma omp parallel for schedule(static) num_threads(threads(workers))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        a[i] = b[i] + scalar * c[i];
    }
}

double stream_dot(std::span<const double> a, std::span<const double> b, std::size_t workers)
{
    check_len(a.size(), b.size());
    const auto w = static_cast<std::size_t>(threads(workers));
    const auto n = a.size();
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

StreamArrays::StreamArrays(std::size_t len, std::size_t workers)
    : workers_(workers), a_(len), b_(len), c_(len)
{
    if (len == 0) {
        throw InvalidArgument("stream arrays need at least one element");
    }
    const auto n = static_cast<std::ptrdiff_t>(len);
    // first touch by the workers that later stream the data
#pragma omp parallel for schedule(static) num_threads(threads(workers_))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        a_[i] = stream_init_a;
        b_[i] = stream_init_b;
        c_[i] = stream_init_c;
    }
}

double StreamArrays::run(StreamKernel k, double scalar)
{
    switch (k) {
    case StreamKernel::copy:
        stream_copy(a_, c_, workers_);
        return 0.0;
    case StreamKernel::mul:
        stream_mul(c_, b_, scalar, workers_);
        return 0.0;
    case StreamKernel::add:
        stream_add(a_, b_, c_, workers_);
        return 0.0;
    case StreamKernel::triad:
        stream_triad(b_, c_, a_, scalar, workers_);
        return 0.0;
    case StreamKernel::dot:
        return stream_dot(a_, b_, workers_);
    }
    return 0.0;
}

bool StreamArrays::check(double a, double b, double c) const
{
    auto all = [](const std::vector<double>& v, double want) {
        return std::all_of(v.begin(), v.end(), [want](double x) { return x == want; });
    };
    return all(a_, a) && all(b_, b) && all(c_, c);
}

StreamResult run_stream(StreamKernel kernel, std::size_t array_len, const StreamOptions& opts)
{
    if (array_len == 0) {
        throw InvalidArgument("array length must be at least 1");
    }
    if (opts.reps == 0) {
        throw InvalidArgument("reps must be at least 1");
    }
    StreamArrays arrays(array_len, opts.workers);
    Gold gold;
    bool dots_ok = true;
    for (std::size_t w = 0; w < opts.warmup; ++w) {
        arrays.run(kernel, opts.scalar);
        gold.apply(kernel, opts.scalar);
    }
    std::vector<double> times;
    times.reserve(opts.reps);
    for (std::size_t r = 0; r < opts.reps; ++r) {
        const auto t0 = Clock::now();
        const double dot = arrays.run(kernel, opts.scalar);
        times.push_back(seconds_since(t0));
        gold.apply(kernel, opts.scalar);
        if (kernel == StreamKernel::dot) {
            dots_ok = dots_ok && dot_matches(dot, gold, array_len);
        }
    }
    auto result = finish(kernel, array_len, std::move(times));
    result.verified = dots_ok && arrays.check(gold.a, gold.b, gold.c);
    return result;
}

std::vector<StreamResult> stream_sweep(std::span<const std::size_t> sizes_bytes,
                                       const StreamOptions& opts)
{
    if (sizes_bytes.empty()) {
        throw InvalidArgument("size list is empty");
    }
    if (opts.reps == 0) {
        throw InvalidArgument("reps must be at least 1");
    }
    std::vector<StreamResult> out;
    for (auto bytes : sizes_bytes) {
        const auto len = bytes / sizeof(double);
        if (len == 0) {
            throw InvalidArgument("array size " + std::to_string(bytes) +
                                  " bytes holds no double");
        }
        StreamArrays arrays(len, opts.workers);
        Gold gold;
        bool dots_ok = true;
        std::array<std::vector<double>, all_stream_kernels.size()> times;
        for (std::size_t r = 0; r < opts.warmup + opts.reps; ++r) {
            const bool timed = r >= opts.warmup;
            for (std::size_t k = 0; k < all_stream_kernels.size(); ++k) {
                const auto kernel = all_stream_kernels[k];
                const auto t0 = Clock::now();
                const double dot = arrays.run(kernel, opts.scalar);
                const auto dt = seconds_since(t0);
                gold.apply(kernel, opts.scalar);
                if (timed) {
                    times[k].push_back(dt);
                }
                if (kernel == StreamKernel::dot) {
                    dots_ok = dots_ok && dot_matches(dot, gold, len);
                }
            }
        }
        const bool ok = dots_ok && arrays.check(gold.a, gold.b, gold.c);
        for (std::size_t k = 0; k < all_stream_kernels.size(); ++k) {
            out.push_back(finish(all_stream_kernels[k], len, std::move(times[k])));
            out.back().verified = ok;
        }
    }
    return out;
}

std::vector<BandwidthRatio> bandwidth_ratio(std::span<const StreamResult> run_a,
                                            std::span<const StreamResult> run_b)
{
    using Key = std::pair<StreamKernel, std::size_t>;
    auto key_name = [](const Key& k) {
        return "(" + std::string(to_string(k.first)) + ", " + std::to_string(k.second) + ")";
    };
    std::map<Key, double> b_index;
    for (const auto& r : run_b) {
        b_index[{r.kernel, r.array_bytes}] = r.bandwidth_gbs;
    }
    std::map<Key, bool> a_keys;
    std::vector<std::string> missing;
    std::vector<BandwidthRatio> out;
    for (const auto& r : run_a) {
        const Key key{r.kernel, r.array_bytes};
        a_keys[key] = true;
        const auto it = b_index.find(key);
        if (it == b_index.end()) {
            missing.push_back(key_name(key) + " in run b");
            continue;
        }
        out.push_back({r.kernel, r.array_bytes, r.bandwidth_gbs / it->second});
    }
    for (const auto& [key, bw] : b_index) {
        if (!a_keys.contains(key)) {
            missing.push_back(key_name(key) + " in run a");
        }
    }
    if (!missing.empty()) {
        throw KeyMismatch(std::move(missing));
    }
    return out;
}

}  // namespace spbench
