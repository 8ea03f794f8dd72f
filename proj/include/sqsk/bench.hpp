#pragma once

#include "sqsk/numeric_kernels.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sqsk {

struct BenchConfig
{
    std::vector<Index> sizes{100, 200, 300, 400, 600};
    double m_factor = 5.0; // m = m_factor * n
    Index rank = 25;
    int repetitions = 5;
    std::uint64_t seed = 0;
    double lam_fraction = 0.1; // lam = lam_fraction * (smallest lam giving w = 0 on the full data)
    double tol = 1e-8;
    bool run_full = true;
};

/// Medians over the repetitions of one problem size.
struct BenchRecord
{
    Index n = 0;
    Index m = 0;
    Index k = 0;
    double t_sketch = 0.0;
    double t_reduce = 0.0;
    double t_solve_sketched = 0.0;
    double t_solve_full = 0.0;
    double ratio = 0.0; // (t_sketch + t_reduce + t_solve_sketched) / t_solve_full, median over repetitions
    int iterations_sketched = 0;
    int iterations_full = 0;
};

struct Fingerprint
{
    std::string compiler;
    std::string build_type;
    std::string eigen_version;
    std::string simd;
    unsigned hardware_threads = 0;
};

struct BenchReport
{
    BenchConfig config;
    std::vector<BenchRecord> records;
    Fingerprint environment;
    int repetitions = 1;
};

Fingerprint environment_fingerprint();

/// Timed comparison of the sketched pipeline (sketch, reduce, solve_reduced)
/// against solve_full on i.i.d. Gaussian data, per size. Feature screening is
/// disabled in both paths so that each solves the same number of variables.
BenchReport run_bench(const BenchConfig& cfg);

/// One row per size: n,m,k,t_sketch,t_reduce,t_solve_sketched,t_solve_full,ratio.
std::string bench_csv(const BenchReport& report);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Median of a nonempty sample.
double median(std::vector<double> v);

} // namespace sqsk
