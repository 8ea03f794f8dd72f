#include "sqsk/nonrobust.hpp"

#include "sqsk/errors.hpp"
#include "sqsk/reduction.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace sqsk {

namespace {

constexpr double kZeroFraction = 1e-12;
constexpr double kRankTol = 1e-10;

double zero_threshold(const Vector& x)
{
    return kZeroFraction * inf_norm(x);
}

std::vector<Index> active_set(const Vector& x)
{
    const double thr = zero_threshold(x);
    std::vector<Index> out;
    for (Index j = 0; j < x.size(); ++j)
        if (std::abs(x(j)) > thr) out.push_back(j);
    return out;
}

// Null vector of A_S, preferring one orthogonal to the sign vector as well.
Vector dependence(const Matrix& AS, const Vector& signs)
{
    const Index k = AS.rows();
    const Index p = AS.cols();
    const double scale = std::max(AS.norm() / std::sqrt(static_cast<double>(p)), 1e-300);

    Matrix M(k + 1, p);
    M.topRows(k) = AS;
    M.row(k) = scale * signs.transpose();
    Eigen::JacobiSVD<Matrix> aug(M, Eigen::ComputeFullV);
    const Vector& sv = aug.singularValues();
    if (p > k + 1) return aug.matrixV().col(p - 1);
    if (sv(sv.size() - 1) <= kRankTol * sv(0)) return aug.matrixV().col(p - 1);

    // Inexact minimizer with exactly k + 1 active entries: sign vector not in range(A_S^T).
    Eigen::JacobiSVD<Matrix> plain(AS, Eigen::ComputeFullV);
    return plain.matrixV().col(p - 1);
}

} // namespace

Solution solve_nonrobust(const Sketch& sk, const Vector& y, double lam, const SolverConfig& cfg)
{
    if (lam < 0.0) throw InputError("solve_nonrobust: lam must be nonnegative");
    return solve_reduced(reduce(sk, y), 0.0, lam, cfg);
}

Index cardinality(const Vector& x)
{
    return static_cast<Index>(active_set(x).size());
}

CardinalityTrace cardinality_reduce(const Matrix& A, const Vector& b, const Vector& x, double tol)
{
    if (A.cols() != x.size() || A.rows() != b.size()) throw InputError("cardinality_reduce: dimension mismatch");
    const double resid = (A * x - b).norm();
    if (!(resid <= tol * (1.0 + b.norm()))) {
        std::ostringstream os;
        os << "cardinality_reduce: ||A x - b|| = " << resid << " exceeds tolerance";
        throw InputError(os.str());
    }

    const Index k = A.rows();
    CardinalityTrace trace;
    trace.x = x;
    Vector& cur = trace.x;

    std::vector<Index> S = active_set(cur);
    for (Index j = 0; j < cur.size(); ++j)
        if (std::abs(cur(j)) <= zero_threshold(x)) cur(j) = 0.0;

    while (static_cast<Index>(S.size()) > k) {
        const Index p = static_cast<Index>(S.size());
        Matrix AS(k, p);
        Vector signs(p);
        for (Index t = 0; t < p; ++t) {
            AS.col(t) = A.col(S[static_cast<std::size_t>(t)]);
            signs(t) = cur(S[static_cast<std::size_t>(t)]) > 0.0 ? 1.0 : -1.0;
        }

        Vector z = dependence(AS, signs);
        if (!(z.cwiseAbs().maxCoeff() > 0.0)) {
            std::ostringstream os;
            os << "cardinality_reduce: no linear dependence among " << p << " active columns (rows = " << k << ")";
            throw NumericalError(os.str());
        }
        // Pivot on the largest coefficient, moving it toward zero, unless that
        // orientation would grow ||x||_1 (possible only off the sign-orthogonal branch).
        Index piv = 0;
        z.cwiseAbs().maxCoeff(&piv);
        z *= -signs(piv) * (z(piv) > 0.0 ? 1.0 : -1.0);
        if (signs.dot(z) > 1e-12 * z.lpNorm<1>()) {
            z = -z;
            double best = 0.0;
            for (Index t = 0; t < p; ++t)
                if (signs(t) * z(t) < 0.0 && std::abs(z(t)) > best) best = std::abs(z(t)), piv = t;
        }
        z /= std::abs(z(piv));

        double rho = std::numeric_limits<double>::infinity();
        for (Index t = 0; t < p; ++t) {
            const double xt = cur(S[static_cast<std::size_t>(t)]);
            if (xt * z(t) < 0.0) rho = std::min(rho, -xt / z(t));
        }

        CardinalityStep step;
        step.pivot = S[static_cast<std::size_t>(piv)];
        step.theta = Vector::Zero(cur.size());
        for (Index t = 0; t < p; ++t) step.theta(S[static_cast<std::size_t>(t)]) = z(t);
        step.rho = rho;

        cur += rho * step.theta;
        // Whatever reached zero (up to roundoff) leaves the support for good.
        const double thr = zero_threshold(cur);
        std::vector<Index> next;
        for (Index j : S) {
            if (std::abs(cur(j)) <= std::max(thr, 1e-15 * rho * std::abs(step.theta(j)))) {
                cur(j) = 0.0;
            } else {
                next.push_back(j);
            }
        }
        if (next.size() == S.size()) {
            // Guarantee progress: the component that defined rho is zero in exact arithmetic.
            Index hit = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Index j : S)
                if (std::abs(cur(j)) < best) best = std::abs(cur(j)), hit = j;
            cur(hit) = 0.0;
            std::erase(next, hit);
        }
        S = std::move(next);
        trace.steps.push_back(std::move(step));
    }
    return trace;
}

SparsityProfile sparsity_profile(ProfileMode mode, const Dataset& data, Index k, double eps,
                                 const std::vector<double>& lambdas, const SolverConfig& cfg)
{
    if (lambdas.empty()) throw InputError("sparsity_profile: lambda grid is empty");
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] > lambdas[i - 1])) throw InputError("sparsity_profile: lambda grid must be increasing");
    data.validate();

    const Sketch sk = power_sketch(data.X, k, 4, cfg.seed);
    const ReducedProblem rp = reduce(sk, data.y);

    SparsityProfile out;
    out.mode = mode;
    out.rank = k;
    out.eps = mode == ProfileMode::robust ? eps : 0.0;
    const Matrix At = rp.R.transpose();
    for (double lam : lambdas) {
        const Solution sol = solve_reduced(rp, out.eps, lam, cfg);
        ProfilePoint pt;
        pt.lam = lam;
        pt.w = sol.w;
        if (mode == ProfileMode::nonrobust) {
            const Vector b = At * sol.w;
            pt.w = cardinality_reduce(At, b, sol.w).x;
        }
        pt.cardinality = static_cast<Index>(support_of(pt.w).size());
        pt.objective = rp.objective(pt.w, out.eps, lam);
        out.points.push_back(std::move(pt));
    }
    return out;
}

} // namespace sqsk
