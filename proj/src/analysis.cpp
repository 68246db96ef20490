#include "spbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "spbench/errors.hpp"

namespace spbench {
namespace {

using Key = std::pair<std::string, std::string>;

std::string key_name(const Key& k) { return "(" + k.first + ", " + k.second + ")"; }

}  // namespace

double BenchRecord::gflops() const
{
    if (!std::isfinite(median_seconds) || median_seconds <= 0.0) {
        return 0.0;
    }
    return 2.0 * static_cast<double>(nnz) / median_seconds / 1e9;
}

PerformanceProfile::PerformanceProfile(std::vector<std::string> kernels,
                                       std::map<std::string, std::vector<double>> sorted_ratios,
                                       std::size_t num_problems)
    : kernels_(std::move(kernels)), ratios_(std::move(sorted_ratios)), num_problems_(num_problems)
{}

const std::vector<double>& PerformanceProfile::ratios(const std::string& kernel) const
{
    const auto it = ratios_.find(kernel);
    if (it == ratios_.end()) {
        throw InvalidArgument("kernel " + kernel + " is not part of the profile");
    }
    return it->second;
}

double PerformanceProfile::evaluate(const std::string& kernel, double theta) const
{
    const auto& r = ratios(kernel);
    if (num_problems_ == 0) {
        return 0.0;
    }
    const auto within = std::upper_bound(r.begin(), r.end(), theta) - r.begin();
    return static_cast<double>(within) / static_cast<double>(num_problems_);
}

std::vector<double> PerformanceProfile::breakpoints() const
{
    std::set<double> all;
    for (const auto& [k, r] : ratios_) {
        for (auto v : r) {
            if (std::isfinite(v)) {
                all.insert(v);
            }
        }
    }
    return {all.begin(), all.end()};
}

std::vector<ProfilePoint> PerformanceProfile::points() const
{
    const auto thetas = breakpoints();
    std::vector<ProfilePoint> out;
    out.reserve(kernels_.size() * thetas.size());
    for (const auto& k : kernels_) {
        for (auto t : thetas) {
            out.push_back({k, t, evaluate(k, t)});
        }
    }
    return out;
}

PerformanceProfile performance_profile(std::span<const BenchRecord> records,
                                       std::span<const std::string> kernels,
                                       std::span<const std::string> problems)
{
    const std::set<std::string> kernel_set(kernels.begin(), kernels.end());
    const std::set<std::string> problem_set(problems.begin(), problems.end());
    std::map<Key, double> times;
    for (const auto& r : records) {
        if (!kernel_set.contains(r.kernel) || !problem_set.contains(r.matrix)) {
            continue;
        }
        if (!(r.median_seconds > 0.0)) {
            throw InvalidArgument("record " + key_name({r.matrix, r.kernel}) +
                                  " has a non-positive time");
        }
        if (!times.emplace(Key{r.matrix, r.kernel}, r.median_seconds).second) {
            throw InvalidArgument("duplicate record " + key_name({r.matrix, r.kernel}));
        }
    }
    std::vector<std::string> missing;
    for (const auto& p : problems) {
        for (const auto& k : kernels) {
            if (!times.contains({p, k})) {
                missing.push_back(key_name({p, k}));
            }
        }
    }
    if (!missing.empty()) {
        throw KeyMismatch(std::move(missing));
    }

    std::map<std::string, std::vector<double>> ratios;
    for (const auto& k : kernels) {
        ratios[k].reserve(problems.size());
    }
    for (const auto& p : problems) {
        double best = INFINITY;
        for (const auto& k : kernels) {
            best = std::min(best, times.at({p, k}));
        }
        for (const auto& k : kernels) {
            const double t = times.at({p, k});
            ratios[k].push_back(std::isfinite(best) ? t / best : INFINITY);
        }
    }
    for (auto& [k, r] : ratios) {
        std::sort(r.begin(), r.end());
    }
    return {std::vector<std::string>(kernels.begin(), kernels.end()), std::move(ratios),
            problems.size()};
}

double roofline_bound(const RooflineInputs& in)
{
    if (!(in.bandwidth_gbs > 0.0) || !(in.bytes_per_nnz > 0.0) || !(in.flops_per_nnz > 0.0)) {
        throw InvalidArgument("roofline inputs must be positive");
    }
    return in.flops_per_nnz * in.bandwidth_gbs / in.bytes_per_nnz;
}

std::vector<ScatterPoint> speedup_scatter(std::span<const BenchRecord> records_a,
                                          std::span<const BenchRecord> records_b)
{
    std::map<Key, const BenchRecord*> b_index;
    for (const auto& r : records_b) {
        b_index[{r.matrix, r.kernel}] = &r;
    }
    std::set<Key> seen;
    std::vector<std::string> missing;
    std::vector<ScatterPoint> out;
    for (const auto& a : records_a) {
        const Key key{a.matrix, a.kernel};
        seen.insert(key);
        const auto it = b_index.find(key);
        if (it == b_index.end()) {
            missing.push_back(key_name(key) + " in run b");
            continue;
        }
        const auto& b = *it->second;
        if (!std::isfinite(a.median_seconds) || !std::isfinite(b.median_seconds)) {
            continue;
        }
        out.push_back({a.matrix, a.kernel, a.nnz, b.median_seconds / a.median_seconds});
    }
    for (const auto& [key, rec] : b_index) {
        if (!seen.contains(key)) {
            missing.push_back(key_name(key) + " in run a");
        }
    }
    if (!missing.empty()) {
        throw KeyMismatch(std::move(missing));
    }
    return out;
}

std::vector<CovPoint> cov_correlation(std::span<const BenchRecord> records_a,
                                      std::span<const BenchRecord> records_b,
                                      const std::map<std::string, RowStats>& stats)
{
    const auto scatter = speedup_scatter(records_a, records_b);
    std::vector<std::string> missing;
    std::set<std::string> reported;
    std::vector<CovPoint> out;
    for (const auto& p : scatter) {
        const auto it = stats.find(p.matrix);
        if (it == stats.end()) {
            if (reported.insert(p.matrix).second) {
                missing.push_back(p.matrix);
            }
            continue;
        }
        out.push_back({p.matrix, p.kernel, it->second.cov, p.speedup});
    }
    if (!missing.empty()) {
        throw KeyMismatch(std::move(missing));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const CovPoint& x, const CovPoint& y) { return x.cov < y.cov; });
    return out;
}

}  // namespace spbench
