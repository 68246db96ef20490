#pragma once

/// @file stream.hpp
/// @brief STREAM-style memory bandwidth kernels (copy, mul, add, triad, dot).

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace spbench {

enum class StreamKernel { copy, mul, add, triad, dot };

inline constexpr std::array<StreamKernel, 5> all_stream_kernels = {
    StreamKernel::copy, StreamKernel::mul, StreamKernel::add, StreamKernel::triad,
    StreamKernel::dot};

std::string_view to_string(StreamKernel k) noexcept;
std::optional<StreamKernel> parse_stream_kernel(std::string_view name) noexcept;

inline constexpr double stream_init_a = 1.0;
inline constexpr double stream_init_b = 2.0;
inline constexpr double stream_init_c = 0.0;
inline constexpr double stream_default_scalar = 0.4;

/// Bytes moved by one kernel pass over arrays of `array_bytes` each:
/// copy, mul and dot touch two arrays, add and triad three.
std::size_t moved_bytes(StreamKernel k, std::size_t array_bytes) noexcept;

// Kernels over caller-owned arrays. All spans must have equal length.
void stream_copy(std::span<const double> a, std::span<double> c, std::size_t workers = 1);
void stream_mul(std::span<const double> c, std::span<double> b, double scalar,
                std::size_t workers = 1);
void stream_add(std::span<const double> a, std::span<const double> b, std::span<double> c,
                std::size_t workers = 1);
void stream_triad(std::span<const double> b, std::span<const double> c, std::span<double> a,
                  double scalar, std::size_t workers = 1);
/// Parallel reduction; per-worker partial sums are combined in worker order,
/// so the result only depends on the worker count.
double stream_dot(std::span<const double> a, std::span<const double> b,
                  std::size_t workers = 1);

/// The three benchmark arrays, initialized to a = 1, b = 2, c = 0.
class StreamArrays {
public:
    explicit StreamArrays(std::size_t len, std::size_t workers = 1);

    /// Runs one kernel over the arrays; returns the dot product for `dot`
    /// and 0 otherwise.
    double run(StreamKernel k, double scalar);

    std::span<const double> a() const noexcept { return a_; }
    std::span<const double> b() const noexcept { return b_; }
    std::span<const double> c() const noexcept { return c_; }
    std::size_t size() const noexcept { return a_.size(); }

    /// True when every element equals the expected value exactly.
    bool check(double a, double b, double c) const;

private:
    std::size_t workers_;
    std::vector<double> a_;
    std::vector<double> b_;
    std::vector<double> c_;
};

struct StreamResult {
    StreamKernel kernel = StreamKernel::copy;
    std::size_t array_bytes = 0;
    std::size_t reps = 0;
    /// Per-rep seconds in execution order.
    std::vector<double> times;
    double median_seconds = 0.0;
    double min_seconds = 0.0;
    double max_seconds = 0.0;
    double bandwidth_gbs = 0.0;
    /// Final arrays (and every dot value) matched the closed-form result.
    bool verified = false;
};

struct StreamOptions {
    std::size_t reps = 10;
    std::size_t warmup = 0;
    double scalar = stream_default_scalar;
    std::size_t workers = 1;
};

/// Times `reps` passes of one kernel over freshly initialized arrays of
/// `array_len` doubles. Throws InvalidArgument for array_len or reps of 0.
StreamResult run_stream(StreamKernel kernel, std::size_t array_len,
                        const StreamOptions& opts = {});

/// For each array size (in bytes, one array) runs the full
/// copy, mul, add, triad, dot sequence per rep and returns five results per
/// size, grouped by size in input order with kernels in that fixed order.
std::vector<StreamResult> stream_sweep(std::span<const std::size_t> sizes_bytes,
                                       const StreamOptions& opts = {});

struct BandwidthRatio {
    StreamKernel kernel;
    std::size_t array_bytes;
    double ratio;
};

/// bandwidth_a / bandwidth_b for every (kernel, size) key, in the order of
/// `run_a`. Throws KeyMismatch listing keys absent from either run.
std::vector<BandwidthRatio> bandwidth_ratio(std::span<const StreamResult> run_a,
                                            std::span<const StreamResult> run_b);

}  // namespace spbench
