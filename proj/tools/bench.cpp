// Benchmark comparing the straight-loop serial kernels against the blocked
// OpenMP kernels, plus the high-level table operations under 1..N threads.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "iklkit/distribution.hpp"
#include "iklkit/kernels.hpp"
#include "iklkit/oracle.hpp"

using namespace iklkit;

namespace {

double time_ms(const std::function<void()>& fn, int reps = 5) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> v(n);
    double s = 0.0;
    for (double& x : v) {
        x = u(rng);
        s += x;
    }
    for (double& x : v) x /= s;
    return v;
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n);
#else
    (void)n;
#endif
}

void bench_reductions() {
    std::mt19937_64 rng(42);
    std::printf("reduction kernels (serial reference vs blocked parallel, %d threads)\n",
                max_threads());
    std::printf("%-18s %12s %12s %12s %10s\n", "kernel", "cells", "serial ms", "parallel ms",
                "speedup");
    for (const std::size_t n : {std::size_t{1} << 16, std::size_t{1} << 20, std::size_t{1} << 22}) {
        const auto p = random_distribution(rng, n);
        const auto q = random_distribution(rng, n);
        struct Row {
            const char* name;
            std::function<double()> serial;
            std::function<double()> parallel;
        };
        const Row rows[] = {
            {"kl", [&] { return kernels::kl_serial(p, q); },
             [&] { return kernels::kl_parallel(p, q); }},
            {"sum", [&] { return kernels::sum_serial(p); },
             [&] { return kernels::sum_parallel(p); }},
            {"total_variation", [&] { return kernels::total_variation_serial(p, q); },
             [&] { return kernels::total_variation_parallel(p, q); }},
            {"dot", [&] { return kernels::dot_serial(p, q); },
             [&] { return kernels::dot_parallel(p, q); }},
        };
        for (const Row& row : rows) {
            volatile double sink = 0.0;
            const double ts = time_ms([&] { sink = row.serial(); });
            const double tp = time_ms([&] { sink = row.parallel(); });
            const double err = std::abs(row.serial() - row.parallel());
            std::printf("%-18s %12zu %12.3f %12.3f %9.2fx   |serial-parallel| = %.3g\n", row.name,
                        n, ts, tp, ts / tp, err);
            (void)sink;
        }
    }
}

void bench_table_ops() {
    // 20 binary variables: a 1M-cell joint.
    config::set_cell_limit(std::size_t{1} << 22);
    const int d = 20;
    oracle::OracleConfig cfg;
    cfg.seed = 7;
    const Dag g = oracle::random_dag(cfg, d);
    const VariableSpace space(std::vector<int>(d, 2));
    const Cgm model = oracle::random_cgm_on(cfg, g, space);
    const Dag g2 = oracle::random_dag(cfg, d, 1);
    std::vector<int> keep;
    for (int i = 0; i < d; i += 2) keep.push_back(i);

    std::printf("\ntable operations on a %d-variable binary model (%zu cells)\n", d,
                space.num_cells());
    std::printf("%-18s %12s %12s %10s\n", "operation", "1 thread ms", "max thr ms", "speedup");
    struct Op {
        const char* name;
        std::function<void()> run;
    };
    const JointTable joint = joint_from_model(model);
    const Op ops[] = {
        {"joint_from_model", [&] { joint_from_model(model); }},
        {"marginalize", [&] { marginalize(joint, keep); }},
        {"markov_project", [&] { markov_project(joint, g2); }},
        {"kl(p, project)", [&] { kl(joint, markov_project(joint, g2)); }},
    };
    const int threads = max_threads();
    for (const Op& op : ops) {
        set_threads(1);
        const double t1 = time_ms(op.run, 3);
        set_threads(threads);
        const double tn = time_ms(op.run, 3);
        std::printf("%-18s %12.2f %12.2f %9.2fx\n", op.name, t1, tn, t1 / tn);
    }
}

}  // namespace

int main() {
#ifndef _OPENMP
    std::printf("built without OpenMP; parallel kernels fall back to the blocked serial path\n");
#endif
    bench_reductions();
    bench_table_ops();
    return 0;
}
