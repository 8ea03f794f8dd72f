#include "sqsk/bench.hpp"

#include "sqsk/errors.hpp"
#include "sqsk/generators.hpp"
#include "sqsk/reduction.hpp"
#include "sqsk/sketch.hpp"
#include "sqsk/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

namespace sqsk {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Smallest lam for which w = 0 solves min ||X^T w - y|| + lam ||w||_1.
double zero_lambda(const Matrix& X, const Vector& y)
{
    return inf_norm(X * y) / y.norm();
}

} // namespace

double median(std::vector<double> v)
{
    if (v.empty()) throw InputError("median of an empty sample");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2) return hi;
    return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw InputError("loglog_slope: need two or more paired points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw InputError("loglog_slope: values must be positive");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw InputError("loglog_slope: x values are all equal");
    return sxy / sxx;
}

Fingerprint environment_fingerprint()
{
    Fingerprint f;
#if defined(__clang__)
    f.compiler = "clang " __clang_version__;
#elif defined(__GNUC__)
    f.compiler = "gcc " __VERSION__;
#else
    f.compiler = "unknown";
#endif
#ifdef NDEBUG
    f.build_type = "release";
#else
    f.build_type = "debug";
#endif
    std::ostringstream ev;
    ev << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
    f.eigen_version = ev.str();
    f.simd = Eigen::SimdInstructionSetsInUse();
    f.hardware_threads = std::thread::hardware_concurrency();
    return f;
}

BenchReport run_bench(const BenchConfig& cfg)
{
    if (cfg.sizes.empty()) throw InputError("run_bench: no sizes");
    if (cfg.repetitions < 1) throw InputError("run_bench: repetitions must be >= 1");
    if (!(cfg.m_factor > 0.0)) throw InputError("run_bench: m_factor must be positive");

    BenchReport rep;
    rep.config = cfg;
    rep.repetitions = cfg.repetitions;
    rep.environment = environment_fingerprint();

    SolverConfig scfg;
    scfg.tol = cfg.tol;
    scfg.screen = false;

    for (Index n : cfg.sizes) {
        const Index m = static_cast<Index>(std::llround(cfg.m_factor * static_cast<double>(n)));
        if (cfg.rank > std::min(n, m)) throw InputError("run_bench: rank exceeds min(n, m)");
        std::vector<double> ts, tr, tss, tf, ratio, its, itf;
        for (int r = 0; r < cfg.repetitions; ++r) {
            const std::uint64_t seed = cfg.seed + 1000003ULL * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(r);
            const Dataset d = gaussian_regression(n, m, std::min<Index>(10, n), 0.5, seed);
            const Matrix& X = *d.X.dense_ptr();
            const double lam = cfg.lam_fraction * zero_lambda(X, d.y);

            auto t0 = Clock::now();
            const Sketch sk = power_sketch(d.X, cfg.rank, 4, seed);
            const double t_sketch = seconds_since(t0);
            t0 = Clock::now();
            const ReducedProblem rp = reduce(sk, d.y);
            const double t_reduce = seconds_since(t0);
            t0 = Clock::now();
            const Solution s = solve_reduced(rp, sk.meta().spectral_error, lam, scfg);
            const double t_solve = seconds_since(t0);

            ts.push_back(t_sketch);
            tr.push_back(t_reduce);
            tss.push_back(t_solve);
            its.push_back(s.iterations);
            if (cfg.run_full) {
                t0 = Clock::now();
                const Solution f = solve_full(d.X, d.y, lam, scfg);
                const double t_full = seconds_since(t0);
                tf.push_back(t_full);
                itf.push_back(f.iterations);
                ratio.push_back((t_sketch + t_reduce + t_solve) / t_full);
            }
        }
        BenchRecord rec;
        rec.n = n;
        rec.m = m;
        rec.k = cfg.rank;
        rec.t_sketch = median(ts);
        rec.t_reduce = median(tr);
        rec.t_solve_sketched = median(tss);
        rec.iterations_sketched = static_cast<int>(median(its));
        if (cfg.run_full) {
            rec.t_solve_full = median(tf);
            rec.ratio = median(ratio);
            rec.iterations_full = static_cast<int>(median(itf));
        }
        rep.records.push_back(rec);
    }
    return rep;
}

std::string bench_csv(const BenchReport& report)
{
    std::ostringstream os;
    os.precision(9);
    os << "n,m,k,t_sketch,t_reduce,t_solve_sketched,t_solve_full,ratio\n";
    for (const BenchRecord& r : report.records)
        os << r.n << ',' << r.m << ',' << r.k << ',' << r.t_sketch << ',' << r.t_reduce << ',' << r.t_solve_sketched
           << ',' << r.t_solve_full << ',' << r.ratio << '\n';
    return os.str();
}

} // namespace sqsk
