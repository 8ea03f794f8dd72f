#include "sqsk/bench.hpp"
#include "sqsk/errors.hpp"
#include "sqsk/io.hpp"
#include "sqsk/multi_instance.hpp"
#include "sqsk/nonrobust.hpp"
#include "sqsk/reduction.hpp"
#include "sqsk/report.hpp"
#include "sqsk/sketch.hpp"
#include "sqsk/solver.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace sqsk;

constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

// Non-convergence is reported after the report is written.
struct NotConverged
{
};

struct Common
{
    std::string data;
    std::string format = "libsvm";
    Index rank = 0;
    std::optional<double> eps;
    std::string lambdas;
    std::uint64_t seed = 0;
    double tol = 1e-8;
    int max_newton = 1000;
    double mu = 10.0;
    bool no_screen = false;
    std::string out;
    std::string cache;

    SolverConfig solver() const
    {
        SolverConfig c;
        c.tol = tol;
        c.max_newton = max_newton;
        c.mu = mu;
        c.seed = seed;
        c.screen = !no_screen;
        return c;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> parse_grid(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || !(v >= 0.0))
            throw InputError("--lambda: '" + item + "' is not a nonnegative number");
        out.push_back(v);
    }
    if (out.empty()) throw InputError("--lambda is required");
    return out;
}

double single_lambda(const std::string& text)
{
    const auto grid = parse_grid(text);
    if (grid.size() != 1) throw InputError("this command takes a single --lambda value");
    return grid.front();
}

Dataset load(const Common& c)
{
    if (c.data.empty()) throw InputError("--data is required");
    Dataset d = load_dataset(c.data, parse_format(c.format));
    d.validate();
    return d;
}

void emit(const Common& c, const std::string& doc)
{
    if (c.out.empty()) {
        std::cout << doc << '\n';
        return;
    }
    std::ofstream f(c.out);
    if (!f) throw InputError("cannot write " + c.out);
    f << doc << '\n';
}

// Loads the cached sketch when the file exists and matches, otherwise sketches and caches.
Sketch obtain_sketch(const Common& c, const Dataset& d)
{
    if (!c.cache.empty() && std::filesystem::exists(c.cache)) {
        Sketch sk = load_sketch(c.cache);
        if (sk.n() != d.n_features() || sk.m() != d.n_observations())
            throw InputError("--sketch-cache " + c.cache + " does not match the data dimensions");
        if (c.rank != 0 && sk.rank() != c.rank)
            throw InputError("--sketch-cache " + c.cache + " has rank " + std::to_string(sk.rank()) +
                             ", --rank asks for " + std::to_string(c.rank));
        return sk;
    }
    if (c.rank < 1) throw InputError("--rank must be >= 1 for sketched models");
    Sketch sk = power_sketch(d.X, c.rank, 4, c.seed);
    if (!c.cache.empty()) save_sketch(sk, c.cache);
    return sk;
}

double robust_eps(const Common& c, const Dataset& d, const Sketch& sk)
{
    if (c.eps) {
        if (!(*c.eps >= 0.0)) throw InputError("--epsilon must be nonnegative");
        return *c.eps;
    }
    return sketch_error(d.X, sk, 20, c.seed).spectral_estimate;
}

void add_common(CLI::App* app, Common& c, bool needs_data = true)
{
    if (needs_data) {
        app->add_option("--data", c.data, "Input data file")->required();
        app->add_option("--format", c.format, "libsvm or csv")->check(CLI::IsMember({"libsvm", "csv"}));
        app->add_option("--sketch-cache", c.cache, "Binary sketch cache (read if present, written otherwise)");
    }
    app->add_option("--rank", c.rank, "Sketch rank k");
    app->add_option("--seed", c.seed, "Random seed");
    app->add_option("--tol", c.tol, "Barrier tolerance");
    app->add_option("--max-newton", c.max_newton, "Newton step budget per solve");
    app->add_option("--mu", c.mu, "Barrier weight multiplier");
    app->add_flag("--no-screen", c.no_screen, "Disable safe feature elimination");
    app->add_option("--out", c.out, "Write the JSON report here instead of stdout");
}

void add_eps(CLI::App* app, Common& c)
{
    app->add_option("--epsilon", c.eps, "Robustness radius (default: estimated sketch error)");
}

int run_sketch(const Common& c)
{
    const Dataset d = load(c);
    if (c.rank < 1) throw InputError("--rank must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();
    const Sketch sk = power_sketch(d.X, c.rank, 4, c.seed);
    const double dt = seconds_since(t0);
    if (!c.cache.empty()) save_sketch(sk, c.cache);
    const SketchError err = sketch_error(d.X, sk, 20, c.seed);
    emit(c, sketch_report(sk, err.spectral_estimate, err.frobenius_exact, dt));
    return 0;
}

int run_solve(const Common& c)
{
    const Dataset d = load(c);
    const double lam = single_lambda(c.lambdas);
    SolveContext ctx;
    ctx.n = d.n_features();
    ctx.m = d.n_observations();
    ctx.lam = lam;
    const auto t0 = std::chrono::steady_clock::now();
    Solution sol;
    if (c.rank == 0 && c.cache.empty()) {
        if (c.eps && *c.eps != 0.0) throw InputError("--epsilon needs a sketched model (--rank)");
        sol = solve_full(d.X, d.y, lam, c.solver());
    } else {
        const Sketch sk = obtain_sketch(c, d);
        ctx.rank = sk.rank();
        ctx.eps = robust_eps(c, d, sk);
        sol = solve_reduced(reduce(sk, d.y), ctx.eps, lam, c.solver());
    }
    ctx.seconds = seconds_since(t0);
    emit(c, solve_report(sol, ctx));
    if (sol.status != SolveStatus::converged) throw NotConverged{};
    return 0;
}

int run_cv(const Common& c, Index folds)
{
    const Dataset d = load(c);
    const auto grid = parse_grid(c.lambdas);
    CVReport rep;
    if (c.rank == 0) {
        rep = cross_validate_full(d, folds, grid, c.solver());
    } else {
        double eps = 0.0;
        if (c.eps) {
            eps = *c.eps;
        } else {
            eps = sketch_error(d.X, power_sketch(d.X, c.rank, 4, c.seed), 20, c.seed).spectral_estimate;
        }
        rep = cross_validate(d, c.rank, folds, grid, eps, c.solver());
    }
    emit(c, cv_report(rep));
    if (!rep.all_converged()) throw NotConverged{};
    return 0;
}

int run_loo(const Common& c)
{
    const Dataset d = load(c);
    const double lam = single_lambda(c.lambdas);
    const auto t0 = std::chrono::steady_clock::now();
    const Sketch sk = obtain_sketch(c, d);
    const double ts = seconds_since(t0);
    LOOReport rep = leave_one_out(d, sk, robust_eps(c, d, sk), lam, c.solver());
    rep.sketch_seconds = ts;
    rep.total_seconds += ts;
    emit(c, loo_report(rep));
    for (const Solution& s : rep.solutions)
        if (s.status != SolveStatus::converged) throw NotConverged{};
    return 0;
}

int run_topic(const Common& c, const std::vector<Index>& queries, Index top, unsigned threads)
{
    const Dataset d = load(c);
    const double lam = single_lambda(c.lambdas);
    const Sketch sk = obtain_sketch(c, d);
    const double eps = robust_eps(c, d, sk);
    const auto reps = topic_image_batch(d, sk, queries, lam, eps, top, c.solver(), threads);
    emit(c, topic_report(reps, lam, eps));
    for (const TopicReport& r : reps)
        if (r.status != SolveStatus::converged) throw NotConverged{};
    return 0;
}

int run_bench_cmd(const Common& c, BenchConfig cfg, const std::string& csv)
{
    cfg.seed = c.seed;
    cfg.tol = c.tol;
    if (c.rank != 0) cfg.rank = c.rank;
    const BenchReport rep = run_bench(cfg);
    if (!csv.empty()) {
        std::ofstream f(csv);
        if (!f) throw InputError("cannot write " + csv);
        f << bench_csv(rep);
    }
    emit(c, bench_report(rep));
    return 0;
}

int run_profile(const Common& c, const std::string& mode)
{
    const Dataset d = load(c);
    if (c.rank < 1) throw InputError("--rank must be >= 1");
    const ProfileMode pm = mode == "robust" ? ProfileMode::robust : ProfileMode::nonrobust;
    double eps = 0.0;
    if (pm == ProfileMode::robust)
        eps = c.eps ? *c.eps
                    : sketch_error(d.X, power_sketch(d.X, c.rank, 4, c.seed), 20, c.seed).spectral_estimate;
    const SparsityProfile prof = sparsity_profile(pm, d, c.rank, eps, parse_grid(c.lambdas), c.solver());
    emit(c, profile_report(prof));
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sketched robust square-root LASSO"};
    app.require_subcommand(1);

    Common c;
    Index folds = 5;
    std::vector<Index> queries;
    Index top = 10;
    unsigned threads = 0;
    BenchConfig bench;
    std::string csv;
    std::string mode = "nonrobust";

    auto* sketch = app.add_subcommand("sketch", "Sketch a dataset and optionally cache it");
    add_common(sketch, c);

    auto* solve = app.add_subcommand("solve", "Solve one instance (full model when --rank is omitted)");
    add_common(solve, c);
    add_eps(solve, c);
    solve->add_option("--lambda", c.lambdas, "Regularization weight")->required();

    auto* cv = app.add_subcommand("cv", "K-fold cross-validation over a lambda grid");
    add_common(cv, c);
    add_eps(cv, c);
    cv->add_option("--lambda", c.lambdas, "Comma-separated lambda grid")->required();
    cv->add_option("--folds", folds, "Number of folds")->check(CLI::PositiveNumber);

    auto* loo = app.add_subcommand("loo", "Leave-one-out solves on a shared sketch");
    add_common(loo, c);
    add_eps(loo, c);
    loo->add_option("--lambda", c.lambdas, "Regularization weight")->required();

    auto* topic = app.add_subcommand("topic", "Topic imaging: regress features on the others");
    add_common(topic, c);
    add_eps(topic, c);
    topic->add_option("--lambda", c.lambdas, "Regularization weight")->required();
    topic->add_option("--query", queries, "Query feature ids (0-based)")->required()->delimiter(',');
    topic->add_option("--top", top, "Features reported per query")->check(CLI::PositiveNumber);
    topic->add_option("--threads", threads, "Worker threads (default: SQSK_THREADS or all cores)");

    auto* bch = app.add_subcommand("bench", "Timing of sketched versus full solves on random data");
    add_common(bch, c, false);
    bch->add_option("--sizes", bench.sizes, "Feature counts n")->delimiter(',');
    bch->add_option("--reps", bench.repetitions, "Repetitions per size")->check(CLI::PositiveNumber);
    bch->add_option("--m-factor", bench.m_factor, "Observations per feature");
    bch->add_option("--lambda-fraction", bench.lam_fraction, "lambda as a fraction of the zero-solution threshold");
    bch->add_option("--csv", csv, "Also write per-size medians as CSV");

    auto* profile = app.add_subcommand("profile", "Cardinality along a lambda grid");
    add_common(profile, c);
    add_eps(profile, c);
    profile->add_option("--lambda", c.lambdas, "Increasing comma-separated lambda grid")->required();
    profile->add_option("--mode", mode, "robust or nonrobust")->check(CLI::IsMember({"robust", "nonrobust"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*sketch) return run_sketch(c);
        if (*solve) return run_solve(c);
        if (*cv) return run_cv(c, folds);
        if (*loo) return run_loo(c);
        if (*topic) return run_topic(c, queries, top, threads);
        if (*bch) return run_bench_cmd(c, bench, csv);
        if (*profile) return run_profile(c, mode);
    } catch (const NotConverged&) {
        std::cerr << "sqsk: solver did not converge (see status in the report)\n";
        return kExitSolver;
    } catch (const InputError& e) {
        std::cerr << "sqsk: " << e.what() << '\n';
        return kExitInput;
    } catch (const NumericalError& e) {
        std::cerr << "sqsk: numerical failure: " << e.what() << '\n';
        return kExitSolver;
    }
    return kExitInput;
}
