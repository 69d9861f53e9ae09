#include "iklkit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "iklkit/errors.hpp"

namespace iklkit::kernels {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t block_count(std::size_t n) {
    return (n + reduction_block - 1) / reduction_block;
}

double sum_block(const double* v, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
}

double dot_block(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

// Returns the partial KL sum; sets violated when some p>0 has q==0.
double kl_block(const double* p, const double* q, std::size_t n, bool& violated) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (p[i] > 0.0) {
            if (q[i] <= 0.0) {
                violated = true;
                return 0.0;
            }
            s += p[i] * std::log(p[i] / q[i]);
        }
    }
    return s;
}

double l1_block(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(a[i] - b[i]);
    return s;
}

double maxdiff_block(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void check_same_size(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw InputError("kernel operands differ in size");
    }
}

template <class BlockFn>
double fold_blocks(std::size_t n, BlockFn&& block, double init, bool take_max) {
    const std::size_t nb = block_count(n);
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(nb); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * reduction_block;
        const std::size_t len = std::min(reduction_block, n - lo);
        partial[static_cast<std::size_t>(b)] = block(lo, len);
    }
    double acc = init;
    for (double p : partial) acc = take_max ? std::max(acc, p) : acc + p;
    return acc;
}

}  // namespace

double sum_serial(std::span<const double> v) {
    return sum_block(v.data(), v.size());
}

double dot_serial(std::span<const double> a, std::span<const double> b) {
    check_same_size(a, b);
    return dot_block(a.data(), b.data(), a.size());
}

double kl_serial(std::span<const double> p, std::span<const double> q) {
    check_same_size(p, q);
    bool violated = false;
    const double s = kl_block(p.data(), q.data(), p.size(), violated);
    return violated ? kInf : s;
}

double total_variation_serial(std::span<const double> p, std::span<const double> q) {
    check_same_size(p, q);
    return 0.5 * l1_block(p.data(), q.data(), p.size());
}

double max_abs_diff_serial(std::span<const double> p, std::span<const double> q) {
    check_same_size(p, q);
    return maxdiff_block(p.data(), q.data(), p.size());
}

double sum_parallel(std::span<const double> v) {
    return fold_blocks(
        v.size(), [&](std::size_t lo, std::size_t len) { return sum_block(v.data() + lo, len); },
        0.0, false);
}

double dot_parallel(std::span<const double> a, std::span<const double> b) {
    check_same_size(a, b);
    return fold_blocks(
        a.size(),
        [&](std::size_t lo, std::size_t len) { return dot_block(a.data() + lo, b.data() + lo, len); },
        0.0, false);
}

double kl_parallel(std::span<const double> p, std::span<const double> q) {
    check_same_size(p, q);
    const std::size_t n = p.size();
    const std::size_t nb = block_count(n);
    std::vector<double> partial(nb, 0.0);
    std::vector<std::uint8_t> bad(nb, 0);
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(nb); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * reduction_block;
        const std::size_t len = std::min(reduction_block, n - lo);
        bool violated = false;
        partial[static_cast<std::size_t>(b)] = kl_block(p.data() + lo, q.data() + lo, len, violated);
        bad[static_cast<std::size_t>(b)] = violated ? 1 : 0;
    }
    double acc = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
        if (bad[b]) return kInf;
        acc += partial[b];
    }
    return acc;
}

double total_variation_parallel(std::span<const double> p, std::span<const double> q) {
    check_same_size(p, q);
    return 0.5 * fold_blocks(
                     p.size(),
                     [&](std::size_t lo, std::size_t len) {
                         return l1_block(p.data() + lo, q.data() + lo, len);
                     },
                     0.0, false);
}

double max_abs_diff_parallel(std::span<const double> p, std::span<const double> q) {
    check_same_size(p, q);
    return fold_blocks(
        p.size(),
        [&](std::size_t lo, std::size_t len) { return maxdiff_block(p.data() + lo, q.data() + lo, len); },
        0.0, true);
}

double sum(std::span<const double> v) {
    return v.size() >= parallel_threshold ? sum_parallel(v) : sum_serial(v);
}

double dot(std::span<const double> a, std::span<const double> b) {
    return a.size() >= parallel_threshold ? dot_parallel(a, b) : dot_serial(a, b);
}

double kl(std::span<const double> p, std::span<const double> q) {
    return p.size() >= parallel_threshold ? kl_parallel(p, q) : kl_serial(p, q);
}

double total_variation(std::span<const double> p, std::span<const double> q) {
    return p.size() >= parallel_threshold ? total_variation_parallel(p, q)
                                          : total_variation_serial(p, q);
}

double max_abs_diff(std::span<const double> p, std::span<const double> q) {
    return p.size() >= parallel_threshold ? max_abs_diff_parallel(p, q)
                                          : max_abs_diff_serial(p, q);
}

}  // namespace iklkit::kernels
