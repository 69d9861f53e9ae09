#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace iklkit::kernels {

// Arrays at or above this size take the blocked OpenMP path; smaller ones run
// the straight serial loop. Exposed so the benchmark and tests can pin sizes
// on either side of the cutoff.
inline constexpr std::size_t parallel_threshold = std::size_t{1} << 15;

// Partial sums are formed over fixed blocks of this many elements and folded
// in block order, so parallel results are bit-identical for any thread count.
inline constexpr std::size_t reduction_block = std::size_t{1} << 12;

// Straight-loop serial references, kept for testing and benchmarking.
double sum_serial(std::span<const double> v);
double dot_serial(std::span<const double> a, std::span<const double> b);
double kl_serial(std::span<const double> p, std::span<const double> q);
double total_variation_serial(std::span<const double> p, std::span<const double> q);
double max_abs_diff_serial(std::span<const double> p, std::span<const double> q);

// Deterministic blocked reductions, parallelized with OpenMP when available.
double sum_parallel(std::span<const double> v);
double dot_parallel(std::span<const double> a, std::span<const double> b);
double kl_parallel(std::span<const double> p, std::span<const double> q);
double total_variation_parallel(std::span<const double> p, std::span<const double> q);
double max_abs_diff_parallel(std::span<const double> p, std::span<const double> q);

// Size-dispatched entry points used by the library.
double sum(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
// KL sum in nats with 0*log(0/q) = 0; +infinity on a support violation.
double kl(std::span<const double> p, std::span<const double> q);
double total_variation(std::span<const double> p, std::span<const double> q);
double max_abs_diff(std::span<const double> p, std::span<const double> q);

// Runs f(cell) for every cell in [0, n). Iterations must touch disjoint state;
// results are then identical with and without OpenMP.
template <class F>
void for_each_cell(std::size_t n, F&& f) {
    if (n >= parallel_threshold) {
#pragma omp parallel for schedule(static)
        for (std::int64_t c = 0; c < static_cast<std::int64_t>(n); ++c) {
            f(static_cast<std::size_t>(c));
        }
    } else {
        for (std::size_t c = 0; c < n; ++c) {
            f(c);
        }
    }
}

}  // namespace iklkit::kernels
