#include "sqsk/errors.hpp"
#include "sqsk/reduction.hpp"
#include "sqsk/solver.hpp"

#include "support/test_util.hpp"

#include <gtest/gtest.h>

using namespace sqsk;
using namespace sqsk::testing;

namespace {

// Brute-force oracle for the dual constraint system: grid search over the box
// ||v||_inf <= lam for the smallest ||R u - v||_2. Returns the distance and
// the grid resolution bound.
std::pair<double, double> grid_min_residual(const Vector& g, double lam, int points)
{
    const Index n = g.size();
    const double h = points > 1 ? 2.0 * lam / (points - 1) : 0.0;
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (;;) {
        double sq = 0.0;
        for (Index i = 0; i < n; ++i) {
            const double v = -lam + h * idx[static_cast<std::size_t>(i)];
            sq += (g(i) - v) * (g(i) - v);
        }
        best = std::min(best, std::sqrt(sq));
        Index d = 0;
        while (d < n && ++idx[static_cast<std::size_t>(d)] == points) idx[static_cast<std::size_t>(d++)] = 0;
        if (d == n) break;
    }
    return {best, 0.5 * h * std::sqrt(static_cast<double>(n))};
}

// Objective of min_z ||Q z - y|| + u^T z by gradient descent with backtracking.
double minimize_f1(const Matrix& Q, const Vector& y, const Vector& u)
{
    auto f = [&](const Vector& z) { return (Q * z - y).norm() + u.dot(z); };
    Vector z = Vector::Zero(Q.cols());
    double step = 1.0;
    double fz = f(z);
    for (int it = 0; it < 200000; ++it) {
        const Vector r = Q * z - y;
        const Vector grad = Q.transpose() * r / r.norm() + u;
        if (grad.norm() < 1e-13) break;
        step *= 2.0;
        for (;;) {
            const Vector zn = z - step * grad;
            const double fn = f(zn);
            if (fn <= fz - 0.5 * step * grad.squaredNorm()) {
                z = zn;
                fz = fn;
                break;
            }
            step *= 0.5;
            if (step < 1e-20) return fz;
        }
    }
    return fz;
}

SolverConfig tight()
{
    SolverConfig cfg;
    cfg.tol = 1e-10;
    return cfg;
}

} // namespace

TEST(Reduce, ScalarGramByHand)
{
    Matrix P(2, 1);
    P << 1, 0;
    Matrix Q(2, 1);
    Q << 1, 1;
    Vector y(2);
    y << 1, 0;
    const ReducedProblem rp = reduce(Sketch(P, Q), y);
    EXPECT_NEAR(rp.c(0), 1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(rp.s, 1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(rp.R(0, 0), std::sqrt(2.0), 1e-14);
    EXPECT_EQ(rp.R(1, 0), 0.0);
    EXPECT_FALSE(rp.rank_deficient);
}

TEST(Reduce, OrthonormalQShortcut)
{
    Rng rng(1);
    const Matrix P = gauss(6, 3, rng);
    const Matrix Q = orthonormal_columns(10, 3, rng);
    const Vector y = gauss(10, rng);
    const ReducedProblem rp = reduce(Sketch(P, Q), y);
    const Vector qty = Q.transpose() * y;
    EXPECT_LE((rp.c - qty).norm(), 1e-10);
    EXPECT_LE((rp.R - P).norm(), 1e-10 * P.norm());
    EXPECT_NEAR(rp.s, std::sqrt(y.squaredNorm() - qty.squaredNorm()), 1e-10);
}

TEST(Reduce, ObjectiveMatchesFullFormProperty)
{
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = uniform_int(1, 10, rng);
        const Index m = uniform_int(3, 14, rng);
        const Index k = uniform_int(1, std::min<Index>(m - 1, 4), rng);
        const Matrix P = gauss(n, k, rng);
        const Matrix Q = gauss(m, k, rng);
        const Vector y = gauss(m, rng);
        const ReducedProblem rp = reduce(Sketch(P, Q), y);
        const Matrix Xhat = P * Q.transpose();

        // Energy split and the identity at w = 0.
        EXPECT_NEAR(rp.s * rp.s + rp.c.squaredNorm(), y.squaredNorm(), 1e-8 * y.squaredNorm());
        EXPECT_NEAR(rp.response_norm(), y.norm(), 1e-10 * y.norm());
        EXPECT_LE((rp.R * rp.R.transpose() - P * Q.transpose() * Q * P.transpose()).norm(), 1e-8 * (1 + Xhat.squaredNorm()));

        // ||Xhat^T w - y|| equals ||(c - R^T w, s)|| for every w.
        const Vector w = gauss(n, rng);
        const double eps = uniform(0, 1, rng);
        const double lam = uniform(0, 1, rng);
        const double full = (Xhat.transpose() * w - y).norm() + eps * w.norm() + lam * w.lpNorm<1>();
        EXPECT_NEAR(rp.objective(w, eps, lam), full, 1e-9 * (1 + full));
    }
}

TEST(Reduce, EnergySplitOnViews)
{
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix X = gauss(8, 30, rng);
        const Sketch sk = power_sketch(DataMatrix(X), 3, 4, trial);
        const std::vector<Index> drop{static_cast<Index>(trial)};
        const Sketch view = sk.drop_rows(drop, SketchSide::observations);
        const Vector y = gauss(view.m(), rng);
        const ReducedProblem rp = reduce(view, y);
        EXPECT_GE(rp.s, 0.0);
        EXPECT_NEAR(rp.s * rp.s + rp.c.squaredNorm(), y.squaredNorm(), 1e-8 * y.squaredNorm());
        const Vector w = gauss(8, rng);
        const double full = (view.reconstruct().transpose() * w - y).norm();
        EXPECT_NEAR(rp.objective(w, 0, 0), full, 1e-9 * (1 + full));
    }
}

TEST(Reduce, FromMomentsMatchesSketchPath)
{
    Rng rng(4);
    const Matrix P = gauss(5, 2, rng);
    const Matrix Q = gauss(9, 2, rng);
    const Vector y = gauss(9, rng);
    const ReducedProblem a = reduce(Sketch(P, Q), y);
    const ReducedProblem b = reduce_from_moments(P, Q.transpose() * Q, Q.transpose() * y, y.squaredNorm());
    EXPECT_LE((a.R - b.R).norm(), 1e-12 * a.R.norm());
    EXPECT_LE((a.c - b.c).norm(), 1e-12 * (1 + a.c.norm()));
    EXPECT_NEAR(a.s, b.s, 1e-12);
}

TEST(Reduce, RankDeficientGramFlagged)
{
    Rng rng(5);
    Matrix Q = gauss(7, 3, rng);
    Q.col(2) = Q.col(0) + Q.col(1);
    const ReducedProblem rp = reduce(Sketch(gauss(4, 3, rng), Q), gauss(7, rng));
    EXPECT_TRUE(rp.rank_deficient);
    EXPECT_TRUE(rp.R.allFinite());
    EXPECT_GE(rp.s, 0.0);
}

TEST(Reduce, Errors)
{
    const Sketch sk(Matrix::Ones(2, 1), Matrix::Ones(3, 1));
    EXPECT_THROW(reduce(sk, Vector::Zero(3)), InputError);
    EXPECT_THROW(reduce(sk, Vector::Ones(4)), InputError);
    Vector bad = Vector::Ones(3);
    bad(1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(reduce(sk, bad), InputError);
    // Moments with c^T c far above y^T y cannot come from a real response.
    EXPECT_THROW(reduce_from_moments(Matrix::Ones(2, 1), Matrix::Ones(1, 1), Vector::Constant(1, 3.0), 1.0),
                 NumericalError);
}

TEST(Screen, ThresholdExample)
{
    ReducedProblem rp;
    rp.R = Matrix::Zero(3, 1);
    rp.R.col(0) << 0.3, 2.0, 0.9;
    rp.c = Vector::Ones(1);
    rp.s = 1.0;
    EXPECT_EQ(screen(rp, 0.5, 1.0), (std::vector<Index>{1, 2}));
    EXPECT_EQ(screen(rp, 0.0, 0.0), (std::vector<Index>{0, 1, 2}));
    EXPECT_EQ(screen(rp, 2.0, 1.0), (std::vector<Index>{0, 1, 2}));
    // Boundary rows are discarded.
    EXPECT_EQ(screen(rp, 0.0, 0.9), (std::vector<Index>{1}));
    EXPECT_THROW(screen(rp, -1.0, 0.0), InputError);
}

TEST(Screen, RestrictRecordsOriginalIds)
{
    Rng rng(6);
    const ReducedProblem rp = random_reduced(6, 2, rng);
    const ReducedProblem sub = restrict_features(rp, {1, 4});
    ASSERT_TRUE(sub.kept.has_value());
    EXPECT_EQ(*sub.kept, (std::vector<Index>{1, 4}));
    EXPECT_TRUE(sub.R.row(1) == rp.R.row(4));
    const ReducedProblem subsub = restrict_features(sub, {1});
    EXPECT_EQ(*subsub.kept, (std::vector<Index>{4}));
}

TEST(Screen, SoundnessProperty)
{
    Rng rng(7);
    SolverConfig on = tight();
    SolverConfig off = tight();
    off.screen = false;
    int screened_any = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = uniform_int(1, 30, rng);
        const Index k = uniform_int(1, 5, rng);
        ReducedProblem rp = random_reduced(n, k, rng);
        // Mixed row scales so that the rule bites.
        for (Index i = 0; i < n; ++i) rp.R.row(i) *= uniform(0.05, 2.0, rng);
        const double eps = uniform(0.0, 0.3, rng);
        const double lam = eps + moderate_lambda(rp, uniform(0.2, 0.9, rng));
        const std::vector<Index> kept = screen(rp, eps, lam);
        if (static_cast<Index>(kept.size()) < n) ++screened_any;

        const Solution full = solve_reduced(rp, eps, lam, off);
        const Solution auto_screened = solve_reduced(rp, eps, lam, on);
        double restricted = rp.response_norm();
        if (!kept.empty()) {
            const Solution sub = solve_reduced(restrict_features(rp, kept), eps, lam, off);
            Vector padded = Vector::Zero(n);
            for (std::size_t i = 0; i < kept.size(); ++i) padded(kept[i]) = sub.w(static_cast<Index>(i));
            restricted = rp.objective(padded, eps, lam);
        }
        ASSERT_EQ(full.status, SolveStatus::converged);
        EXPECT_NEAR(restricted, full.objective, 1e-6 * (1 + full.objective)) << "trial " << trial;
        EXPECT_NEAR(auto_screened.objective, full.objective, 1e-6 * (1 + full.objective)) << "trial " << trial;
    }
    EXPECT_GT(screened_any, 50);
}

TEST(WorstCase, ScalarExample)
{
    const Matrix Xhat = Matrix::Zero(1, 1);
    const Vector w = Vector::Ones(1);
    const Vector y = Vector::Ones(1);
    const PerturbationWitness pw = worst_case_perturbation(Xhat, w, y, 0.5);
    EXPECT_NEAR(pw.dense()(0, 0), -0.5, 1e-15);
    EXPECT_NEAR(pw.attained_value, 1.5, 1e-15);
}

TEST(WorstCase, ZeroWeights)
{
    Rng rng(8);
    const Matrix Xhat = gauss(3, 5, rng);
    const Vector y = gauss(5, rng);
    const PerturbationWitness pw = worst_case_perturbation(Xhat, Vector::Zero(3), y, 0.7);
    EXPECT_NEAR(pw.attained_value, y.norm(), 1e-14);
    EXPECT_NEAR(pw.feature_dir.norm(), 1.0, 1e-15);
}

TEST(WorstCase, RobustIdentityProperty)
{
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = uniform_int(1, 8, rng);
        const Index m = uniform_int(1, 12, rng);
        const Matrix Xhat = gauss(n, m, rng);
        const Vector w = gauss(n, rng);
        const Vector y = gauss(m, rng);
        const double eps = uniform(0.0, 2.0, rng);
        const PerturbationWitness pw = worst_case_perturbation(Xhat, w, y, eps);
        const double bound = (Xhat.transpose() * w - y).norm() + eps * w.norm();
        EXPECT_NEAR(pw.attained_value, bound, 1e-9);

        const Matrix D = pw.dense();
        const Eigen::JacobiSVD<Matrix> svd(D);
        EXPECT_NEAR(svd.singularValues()(0), eps, 1e-10);
        EXPECT_NEAR(D.norm(), eps, 1e-10);
        EXPECT_NEAR(((Xhat + D).transpose() * w - y).norm(), pw.attained_value, 1e-10 * (1 + bound));

        for (int s = 0; s < 200; ++s) {
            Matrix Delta = gauss(n, m, rng);
            Delta *= uniform(0.0, 1.0, rng) * eps / Eigen::JacobiSVD<Matrix>(Delta).singularValues()(0);
            EXPECT_LE(((Xhat + Delta).transpose() * w - y).norm(), bound + 1e-12 * (1 + bound));
        }
    }
}

TEST(DualFeasible, ClipExample)
{
    ReducedProblem rp;
    rp.R = Matrix::Identity(2, 2);
    rp.c = Vector::Zero(2);
    Vector u(2);
    u << 2.0, -0.5;
    const FeasibilityCheck a = dual_feasible(u, rp, 1.2, 1.0);
    EXPECT_TRUE(a.feasible);
    EXPECT_DOUBLE_EQ(a.v(0), 1.0);
    EXPECT_DOUBLE_EQ(a.v(1), -0.5);
    EXPECT_DOUBLE_EQ(a.r(0), 1.0);
    EXPECT_DOUBLE_EQ(a.r(1), 0.0);
    EXPECT_FALSE(dual_feasible(u, rp, 0.5, 1.0).feasible);
}

TEST(DualFeasible, MatchesGridOracle)
{
    Rng rng(10);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const Index n = uniform_int(1, 3, rng);
        const Index k = uniform_int(1, 3, rng);
        const ReducedProblem rp = random_reduced(n, k, rng);
        const Vector u = gauss(k, rng) * uniform(0.1, 1.0, rng);
        const double lam = uniform(0.0, 1.5, rng);
        const double eps = uniform(0.0, 1.5, rng);
        const auto [dist, resolution] = grid_min_residual(rp.R * u, lam, n == 3 ? 81 : 401);
        // Skip draws that sit within the grid resolution of the boundary.
        if (std::abs(dist - eps) <= resolution + 1e-12) continue;
        ++checked;
        const FeasibilityCheck fc = dual_feasible(u, rp, eps, lam);
        EXPECT_EQ(fc.feasible, dist < eps) << "trial " << trial;
        EXPECT_LE(fc.r.norm(), dist + 1e-12);
        EXPECT_LE(fc.v.lpNorm<Eigen::Infinity>(), lam);
        EXPECT_LE((rp.R * u - fc.v - fc.r).norm(), 1e-12);
    }
    EXPECT_GT(checked, 200);
}

TEST(DualValue, Examples)
{
    ReducedProblem rp;
    rp.R = Matrix::Ones(1, 1);
    rp.c = Vector::Constant(1, 0.6);
    rp.s = 0.8;
    EXPECT_DOUBLE_EQ(dual_value(Vector::Zero(1), rp), 0.8);
    EXPECT_NEAR(dual_value(Vector::Constant(1, 0.6), rp), 1.0, 1e-15);
    EXPECT_THROW(dual_value(Vector::Constant(1, 1.5), rp), InputError);
}

TEST(DualValue, WeakDualityProperty)
{
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = uniform_int(1, 8, rng);
        const Index k = uniform_int(1, 3, rng);
        const ReducedProblem rp = random_reduced(n, k, rng);
        const double eps = uniform(0.0, 0.5, rng);
        const double lam = uniform(0.05, 1.0, rng);
        const double primal = reference_solve(to_instance(rp, eps, lam)).objective;
        for (int s = 0; s < 20; ++s) {
            Vector u = gauss(k, rng);
            u *= uniform(0.0, 1.0, rng) / u.norm();
            while (!dual_feasible(u, rp, eps, lam).feasible) u *= 0.5;
            EXPECT_LE(dual_value(u, rp), primal + 1e-6) << "trial " << trial;
        }
    }
}

TEST(DualCertificate, FeasibleAndTightAtOptimum)
{
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const ReducedProblem rp = random_reduced(uniform_int(2, 20, rng), uniform_int(1, 4, rng), rng);
        const double eps = uniform(0.0, 0.3, rng);
        const double lam = moderate_lambda(rp, 0.3);
        const SolverConfig cfg = tight();
        const Solution sol = solve_reduced(rp, eps, lam, cfg);
        const DualPoint dp = dual_certificate(rp, sol.w, eps, lam);
        EXPECT_TRUE(dp.feasible);
        EXPECT_LE(std::hypot(dp.u.norm(), dp.t), 1.0 + 1e-9);
        EXPECT_LE(dp.v.lpNorm<Eigen::Infinity>(), lam + 1e-9);
        EXPECT_LE(dp.r.norm(), eps + 1e-9);
        EXPECT_LE((rp.R * dp.u - dp.v - dp.r).norm(), 1e-7);
        EXPECT_LE(dp.value, sol.objective + 1e-10 * (1 + sol.objective));
        EXPECT_LE(sol.objective - dp.value, 10 * cfg.tol * (1 + sol.objective)) << "trial " << trial;
    }
}

TEST(F1ClosedForm, ZeroMultiplier)
{
    Rng rng(13);
    const Matrix Q = gauss(6, 2, rng);
    const Vector y = gauss(6, rng);
    const ReducedProblem rp = reduce(Sketch(Matrix::Ones(1, 2), Q), y);
    const auto v = f1_closed_form(Vector::Zero(2), Q, y);
    ASSERT_TRUE(v.has_value());
    EXPECT_NEAR(*v, rp.s, 1e-12);
}

TEST(F1ClosedForm, MatchesNumericMinimization)
{
    Rng rng(14);
    for (int trial = 0; trial < 30; ++trial) {
        const Index k = uniform_int(1, 3, rng);
        const Index m = uniform_int(k + 1, 8, rng);
        const Matrix Q = gauss(m, k, rng);
        const Vector y = gauss(m, rng);
        // u = K^{1/2} ubar with ||ubar|| < 1.
        const PsdRoots roots = psd_sqrt_invsqrt(Q.transpose() * Q);
        Vector ubar = gauss(k, rng);
        ubar *= uniform(0.0, 0.8, rng) / ubar.norm();
        const Vector u = roots.half * ubar;
        const auto closed = f1_closed_form(u, Q, y);
        ASSERT_TRUE(closed.has_value());
        EXPECT_NEAR(*closed, minimize_f1(Q, y, u), 1e-5) << "trial " << trial;
    }
}

TEST(F1ClosedForm, UnboundedBeyondUnitBall)
{
    Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        const Index k = uniform_int(1, 3, rng);
        const Matrix Q = gauss(k + 3, k, rng);
        const Vector y = gauss(k + 3, rng);
        const Matrix K = Q.transpose() * Q;
        const PsdRoots roots = psd_sqrt_invsqrt(K);
        Vector ubar = gauss(k, rng);
        ubar *= uniform(1.1, 3.0, rng) / ubar.norm();
        const Vector u = roots.half * ubar;
        EXPECT_FALSE(f1_closed_form(u, Q, y).has_value());

        // Divergence probe: walk along -K^{-1} u until the objective passes -1e6.
        const Vector dir = -K.ldlt().solve(u);
        double t = 1.0;
        double value = 0.0;
        for (int it = 0; it < 200; ++it, t *= 2.0) {
            value = (Q * (t * dir) - y).norm() + u.dot(t * dir);
            if (value < -1e6) break;
        }
        EXPECT_LT(value, -1e6);
    }
}
