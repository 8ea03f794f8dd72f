#include "sqsk/multi_instance.hpp"

#include "sqsk/errors.hpp"
#include "sqsk/reduction.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace sqsk {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr double kRecomputeFraction = 0.1;

std::vector<Index> complement(Index m, const std::vector<Index>& held)
{
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(m) - held.size());
    std::size_t h = 0;
    for (Index i = 0; i < m; ++i) {
        if (h < held.size() && held[h] == i) {
            ++h;
            continue;
        }
        out.push_back(i);
    }
    return out;
}

Vector gather(const Vector& y, const std::vector<Index>& idx)
{
    Vector out(static_cast<Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out(static_cast<Index>(j)) = y(idx[j]);
    return out;
}

CVRecord evaluate(const Dataset& data, const std::vector<Index>& held, const Vector& y_val, Index fold, double lam,
                  const Solution& sol, double seconds)
{
    CVRecord rec;
    rec.fold = fold;
    rec.lam = lam;
    rec.objective = sol.objective;
    rec.cardinality = static_cast<Index>(sol.support.size());
    rec.solve_seconds = seconds;
    rec.status = sol.status;
    const Vector scores = data.X.select_columns(held).transpose_times(sol.w);
    rec.validation_loss = (scores - y_val).norm();
    if (data.has_binary_labels()) rec.f1 = f1_score(scores, y_val);
    return rec;
}

void check_cv_args(const Dataset& data, Index folds, const std::vector<double>& lambdas)
{
    data.validate();
    if (lambdas.empty()) throw InputError("cross_validate: lambda grid is empty");
    if (folds < 2) throw InputError("cross_validate: need at least 2 folds");
    if (data.n_observations() < folds) throw InputError("cross_validate: fewer observations than folds");
}

std::vector<double> mean_by_lambda(const CVReport& r, auto&& field)
{
    std::vector<double> sum(r.lambdas.size(), 0.0);
    std::vector<int> count(r.lambdas.size(), 0);
    for (std::size_t i = 0; i < r.records.size(); ++i) {
        const auto v = field(r.records[i]);
        if (!v) continue;
        const std::size_t j = i % r.lambdas.size();
        sum[j] += *v;
        ++count[j];
    }
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] = count[j] ? sum[j] / count[j] : 0.0;
    return sum;
}

} // namespace

std::vector<std::vector<Index>> make_folds(Index m, Index folds, std::uint64_t seed)
{
    if (folds < 2 || folds > m) {
        std::ostringstream os;
        os << "make_folds: need 2 <= folds <= m, got folds = " << folds << ", m = " << m;
        throw InputError(os.str());
    }
    std::vector<Index> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<std::vector<Index>> out(static_cast<std::size_t>(folds));
    for (Index i = 0; i < m; ++i) out[static_cast<std::size_t>(i % folds)].push_back(perm[static_cast<std::size_t>(i)]);
    for (auto& f : out) std::sort(f.begin(), f.end());
    return out;
}

double f1_score(const Vector& scores, const Vector& labels)
{
    if (scores.size() != labels.size()) throw InputError("f1_score: length mismatch");
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (Index i = 0; i < scores.size(); ++i) {
        const bool pred = scores(i) >= 0.0;
        const bool truth = labels(i) > 0.0;
        tp += pred && truth;
        fp += pred && !truth;
        fn += !pred && truth;
    }
    const double denom = 2.0 * tp + fp + fn;
    return denom > 0.0 ? 2.0 * tp / denom : 1.0;
}

std::vector<double> CVReport::mean_validation_loss() const
{
    return mean_by_lambda(*this, [](const CVRecord& r) { return std::optional<double>(r.validation_loss); });
}

std::vector<double> CVReport::mean_f1() const
{
    if (records.empty() || !records.front().f1) return {};
    return mean_by_lambda(*this, [](const CVRecord& r) { return r.f1; });
}

bool CVReport::all_converged() const
{
    return std::all_of(records.begin(), records.end(),
                       [](const CVRecord& r) { return r.status == SolveStatus::converged; });
}

CVReport cross_validate(const Dataset& data, Index k, Index folds, const std::vector<double>& lambdas, double eps,
                        const SolverConfig& cfg)
{
    check_cv_args(data, folds, lambdas);
    const auto t_all = Clock::now();
    const Index m = data.n_observations();

    CVReport rep;
    rep.sketched = true;
    rep.rank = k;
    rep.eps = eps;
    rep.lambdas = lambdas;
    rep.folds = make_folds(m, folds, cfg.seed);

    auto t0 = Clock::now();
    const Sketch sk = power_sketch(data.X, k, 4, cfg.seed);
    rep.sketch_seconds = seconds_since(t0);

    t0 = Clock::now();
    const Matrix P = sk.P();
    const Matrix K = sk.gram();
    const Vector qty = sk.qt_times(data.y);
    const double yty = data.y.squaredNorm();
    rep.reduce_seconds += seconds_since(t0);

    for (std::size_t f = 0; f < rep.folds.size(); ++f) {
        const std::vector<Index>& held = rep.folds[f];
        t0 = Clock::now();
        ReducedProblem rp;
        if (static_cast<double>(held.size()) > kRecomputeFraction * static_cast<double>(m)) {
            const Sketch train = sk.drop_rows(held, SketchSide::observations);
            rp = reduce(train, gather(data.y, complement(m, held)));
        } else {
            Matrix Kf = K;
            Vector qf = qty;
            double yf = yty;
            for (Index i : held) {
                const Vector q = sk.q_row(i).transpose();
                Kf.noalias() -= q * q.transpose();
                qf -= data.y(i) * q;
                yf -= data.y(i) * data.y(i);
            }
            rp = reduce_from_moments(P, Kf, qf, yf);
        }
        rep.reduce_seconds += seconds_since(t0);

        const Vector y_val = gather(data.y, held);
        for (double lam : lambdas) {
            t0 = Clock::now();
            const Solution sol = solve_reduced(rp, eps, lam, cfg);
            const double dt = seconds_since(t0);
            rep.solve_seconds += dt;
            rep.records.push_back(evaluate(data, held, y_val, static_cast<Index>(f), lam, sol, dt));
        }
    }
    rep.total_seconds = seconds_since(t_all);
    return rep;
}

CVReport cross_validate_full(const Dataset& data, Index folds, const std::vector<double>& lambdas,
                             const SolverConfig& cfg)
{
    check_cv_args(data, folds, lambdas);
    const auto t_all = Clock::now();
    const Index m = data.n_observations();

    CVReport rep;
    rep.sketched = false;
    rep.lambdas = lambdas;
    rep.folds = make_folds(m, folds, cfg.seed);

    for (std::size_t f = 0; f < rep.folds.size(); ++f) {
        const std::vector<Index>& held = rep.folds[f];
        const std::vector<Index> train = complement(m, held);
        const DataMatrix Xt = data.X.select_columns(train);
        const Vector yt = gather(data.y, train);
        const Vector y_val = gather(data.y, held);
        for (double lam : lambdas) {
            const auto t0 = Clock::now();
            const Solution sol = solve_full(Xt, yt, lam, cfg);
            const double dt = seconds_since(t0);
            rep.solve_seconds += dt;
            rep.records.push_back(evaluate(data, held, y_val, static_cast<Index>(f), lam, sol, dt));
        }
    }
    rep.total_seconds = seconds_since(t_all);
    return rep;
}

DowndatedMoments downdate_moments(const Sketch& sk, const Matrix& K, const Vector& qty, double yty, const Vector& y,
                                  Index i)
{
    if (i < 0 || i >= sk.m() || y.size() != sk.m()) throw InputError("downdate_moments: index or length mismatch");
    const Vector q = sk.q_row(i).transpose();
    DowndatedMoments out;
    out.K = K - q * q.transpose();
    out.qty = qty - y(i) * q;
    out.yty = yty - y(i) * y(i);
    return out;
}

LOOReport leave_one_out(const Dataset& data, const Sketch& sk, double eps, double lam, const SolverConfig& cfg)
{
    data.validate();
    const Index m = data.n_observations();
    if (m < 2) throw InputError("leave_one_out: need at least 2 observations");
    if (sk.m() != m || sk.n() != data.n_features()) throw InputError("leave_one_out: sketch does not match data");

    const auto t_all = Clock::now();
    LOOReport rep;
    rep.rank = sk.rank();
    rep.eps = eps;
    rep.lam = lam;

    const Matrix P = sk.P();
    const Matrix K = sk.gram();
    const Vector qty = sk.qt_times(data.y);
    const double yty = data.y.squaredNorm();

    rep.solutions.reserve(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) {
        const auto t0 = Clock::now();
        ReducedProblem rp;
        try {
            const DowndatedMoments dm = downdate_moments(sk, K, qty, yty, data.y, i);
            rp = reduce_from_moments(P, dm.K, dm.qty, dm.yty);
        } catch (const NumericalError& e) {
            std::clog << "leave_one_out: downdate for observation " << i << " failed (" << e.what()
                      << "), recomputing\n";
            rep.fallbacks.push_back(i);
            const Index drop[] = {i};
            Vector yi(m - 1);
            yi << data.y.head(i), data.y.tail(m - 1 - i);
            rp = reduce(sk.drop_rows(drop, SketchSide::observations), yi);
        }
        rep.solutions.push_back(solve_reduced(rp, eps, lam, cfg));
        rep.solve_seconds += seconds_since(t0);
    }
    rep.total_seconds = seconds_since(t_all);
    return rep;
}

LOOReport leave_one_out(const Dataset& data, Index k, double eps, double lam, const SolverConfig& cfg)
{
    data.validate();
    const auto t0 = Clock::now();
    const Sketch sk = power_sketch(data.X, k, 4, cfg.seed);
    const double ts = seconds_since(t0);
    LOOReport rep = leave_one_out(data, sk, eps, lam, cfg);
    rep.sketch_seconds = ts;
    rep.total_seconds += ts;
    return rep;
}

TopicReport topic_image(const Dataset& data, const Sketch& sk, Index query, double lam, double eps, Index top_t,
                        const SolverConfig& cfg)
{
    if (query < 0 || query >= data.n_features()) throw InputError("topic_image: query feature out of range");
    if (top_t < 1) throw InputError("topic_image: top_t must be >= 1");
    if (sk.n() != data.n_features() || sk.m() != data.n_observations())
        throw InputError("topic_image: sketch does not match data");

    const Vector target = data.X.row(query);
    if (!(target.squaredNorm() > 0.0)) {
        std::ostringstream os;
        os << "topic_image: feature " << query << " is zero in every observation";
        throw InputError(os.str());
    }

    const auto t0 = Clock::now();
    const Index drop[] = {query};
    const Sketch design = sk.drop_rows(drop, SketchSide::features);
    const Solution sol = solve_reduced(reduce(design, target), eps, lam, cfg);

    TopicReport rep;
    rep.query = query;
    rep.status = sol.status;
    for (Index i : sol.support) {
        const Index id = i < query ? i : i + 1;
        rep.ranking.emplace_back(id, std::abs(sol.w(i)));
    }
    std::stable_sort(rep.ranking.begin(), rep.ranking.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (static_cast<Index>(rep.ranking.size()) > top_t) rep.ranking.resize(static_cast<std::size_t>(top_t));
    rep.solve_seconds = seconds_since(t0);
    return rep;
}

unsigned driver_threads()
{
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SQSK_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return std::min<unsigned>(static_cast<unsigned>(v), hw);
    }
    return hw;
}

std::vector<TopicReport> topic_image_batch(const Dataset& data, const Sketch& sk, const std::vector<Index>& queries,
                                           double lam, double eps, Index top_t, const SolverConfig& cfg,
                                           unsigned threads)
{
    std::vector<TopicReport> out(queries.size());
    if (queries.empty()) return out;
    const unsigned workers =
        std::min<unsigned>(threads ? threads : driver_threads(), static_cast<unsigned>(queries.size()));

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](unsigned id) {
        try {
            for (std::size_t q; (q = next.fetch_add(1)) < queries.size();)
                out[q] = topic_image(data, sk, queries[q], lam, eps, top_t, cfg);
        } catch (...) {
            errors[id] = std::current_exception();
            next = queries.size();
        }
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned id = 0; id < workers; ++id) pool.emplace_back(work, id);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

} // namespace sqsk
