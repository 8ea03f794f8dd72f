#include "sqsk/reduction.hpp"

#include "sqsk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sqsk {

namespace {

Vector clip(const Vector& g, double lam)
{
    return g.cwiseMax(-lam).cwiseMin(lam);
}

double soft_norm(const Vector& g, double lam)
{
    return (g - clip(g, lam)).norm();
}

} // namespace

double ReducedProblem::response_norm() const
{
    return std::sqrt(c.squaredNorm() + s * s);
}

double ReducedProblem::objective(const Vector& w, double eps, double lam) const
{
    const Vector res = c - R.transpose() * w;
    return std::sqrt(res.squaredNorm() + s * s) + eps * w.norm() + lam * w.lpNorm<1>();
}

ReducedProblem reduce_from_moments(const Matrix& P, const Matrix& K, const Vector& qty, double yty, double rank_tol)
{
    if (K.rows() != P.cols() || qty.size() != P.cols()) throw InputError("reduce: moment dimensions disagree with P");
    if (!(yty > 0.0)) throw InputError("reduce: response must be nonzero");

    const PsdRoots roots = psd_sqrt_invsqrt(K, rank_tol);

    ReducedProblem rp;
    rp.c = roots.inv_half * qty;
    rp.R = P * roots.half;
    rp.rank_deficient = roots.rank_deficient();

    const double gap = yty - rp.c.squaredNorm();
    if (gap < -1e-8 * yty) {
        std::ostringstream os;
        os << "reduce: c^T c exceeds y^T y by " << -gap << " (inconsistent sketch/response)";
        throw NumericalError(os.str());
    }
    rp.s = std::sqrt(std::max(0.0, gap));
    return rp;
}

ReducedProblem reduce(const Sketch& sk, const Vector& y, double rank_tol)
{
    if (y.size() != sk.m()) {
        std::ostringstream os;
        os << "reduce: response has length " << y.size() << ", sketch has " << sk.m() << " observations";
        throw InputError(os.str());
    }
    if (!y.allFinite()) throw InputError("reduce: response has non-finite entries");
    return reduce_from_moments(sk.P(), sk.gram(), sk.qt_times(y), y.squaredNorm(), rank_tol);
}

std::vector<Index> screen(const ReducedProblem& rp, double eps, double lam)
{
    if (eps < 0.0 || lam < 0.0) throw InputError("screen: eps and lam must be nonnegative");
    std::vector<Index> kept;
    const double threshold = lam - eps;
    for (Index i = 0; i < rp.n_features(); ++i)
        if (lam <= eps || rp.R.row(i).norm() > threshold) kept.push_back(i);
    return kept;
}

ReducedProblem restrict_features(const ReducedProblem& rp, const std::vector<Index>& rows)
{
    ReducedProblem out;
    out.R.resize(static_cast<Index>(rows.size()), rp.R.cols());
    std::vector<Index> ids;
    ids.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Index r = rows[i];
        if (r < 0 || r >= rp.n_features()) throw InputError("restrict_features: row out of range");
        out.R.row(static_cast<Index>(i)) = rp.R.row(r);
        ids.push_back(rp.kept ? (*rp.kept)[static_cast<std::size_t>(r)] : r);
    }
    out.c = rp.c;
    out.s = rp.s;
    out.kept = std::move(ids);
    out.rank_deficient = rp.rank_deficient;
    return out;
}

PerturbationWitness worst_case_perturbation(const Matrix& Xhat, const Vector& w, const Vector& y, double eps)
{
    if (eps < 0.0) throw InputError("worst_case_perturbation: eps must be nonnegative");
    if (Xhat.rows() != w.size() || Xhat.cols() != y.size())
        throw InputError("worst_case_perturbation: dimension mismatch");

    const Vector res = Xhat.transpose() * w - y;
    PerturbationWitness out;
    out.eps = eps;

    const double rn = res.norm();
    if (rn > 0.0) {
        out.observation_dir = res / rn;
    } else {
        out.observation_dir = Vector::Unit(y.size(), 0);
    }
    const double wn = w.norm();
    if (wn > 0.0) {
        out.feature_dir = w / wn;
    } else {
        out.feature_dir = Vector::Unit(w.size(), 0);
    }
    // (Xhat + Delta)^T w - y = res + eps * (feature_dir . w) * observation_dir
    const Vector perturbed = res + eps * out.feature_dir.dot(w) * out.observation_dir;
    out.attained_value = perturbed.norm();
    return out;
}

FeasibilityCheck dual_feasible(const Vector& u, const ReducedProblem& rp, double eps, double lam)
{
    if (u.size() != rp.rank()) throw InputError("dual_feasible: u has wrong length");
    FeasibilityCheck out;
    const Vector g = rp.R * u;
    out.v = clip(g, lam);
    out.r = g - out.v;
    out.feasible = out.r.norm() <= eps;
    return out;
}

double dual_value(const Vector& u, const ReducedProblem& rp)
{
    if (u.size() != rp.rank()) throw InputError("dual_value: u has wrong length");
    const double uu = u.squaredNorm();
    if (uu > 1.0 + 1e-12) {
        std::ostringstream os;
        os << "dual_value: ||u||_2 = " << std::sqrt(uu) << " exceeds 1";
        throw InputError(os.str());
    }
    return u.dot(rp.c) + rp.s * std::sqrt(std::max(0.0, 1.0 - uu));
}

DualPoint dual_certificate(const ReducedProblem& rp, const Vector& w, double eps, double lam)
{
    const Index k = rp.rank();
    const Vector head = rp.c - rp.R.transpose() * w;
    const double norm = std::sqrt(head.squaredNorm() + rp.s * rp.s);

    Vector u = norm > 0.0 ? Vector(head / norm) : Vector::Zero(k);
    const Vector g = rp.R * u;

    // Largest theta in [0, 1] with ||soft(theta g, lam)||_2 <= eps; monotone in theta.
    // Slack for roundoff in R u, e.g. when eps = lam = 0 and R u should vanish.
    // The bisection aims at half the slack so that recomputing R (theta u) stays inside.
    const double slack = 1e-12 * (1.0 + g.norm());
    const double limit = eps + slack;
    double theta = 1.0;
    if (soft_norm(g, lam) > limit) {
        double lo = 0.0;
        double hi = 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
            const double mid = 0.5 * (lo + hi);
            (soft_norm(mid * g, lam) <= eps + 0.5 * slack ? lo : hi) = mid;
        }
        theta = lo;
    }

    // dual_value(theta u) is concave in theta; take its maximizer on [0, theta].
    const double un = u.norm();
    if (un > 0.0) {
        const double a = u.dot(rp.c) / un;
        const double best = a > 0.0 ? a / std::sqrt(a * a + rp.s * rp.s) / un : 0.0;
        theta = std::min(theta, best);
    }

    DualPoint out;
    out.u = theta * u;
    out.t = std::sqrt(std::max(0.0, 1.0 - out.u.squaredNorm()));
    const FeasibilityCheck fc = dual_feasible(out.u, rp, eps, lam);
    out.v = fc.v;
    out.r = fc.r;
    out.feasible = fc.r.norm() <= limit;
    out.value = dual_value(out.u, rp);
    return out;
}

std::optional<double> f1_closed_form(const Vector& u, const Matrix& Q, const Vector& y, double rank_tol)
{
    if (u.size() != Q.cols() || y.size() != Q.rows()) throw InputError("f1_closed_form: dimension mismatch");
    const Matrix K = Q.transpose() * Q;
    const PsdRoots roots = psd_sqrt_invsqrt(K, rank_tol);

    // u must lie in range(K); otherwise u^T z is unbounded along null(Q).
    const Vector in_range = roots.half * (roots.inv_half * u);
    if ((u - in_range).norm() > 1e-10 * (1.0 + u.norm())) return std::nullopt;

    const Vector c = roots.inv_half * (Q.transpose() * y);
    const double s = std::sqrt(std::max(0.0, y.squaredNorm() - c.squaredNorm()));
    const Vector ubar = roots.inv_half * u;
    const double uu = ubar.squaredNorm();
    if (uu > 1.0) return std::nullopt;
    return ubar.dot(c) + s * std::sqrt(std::max(0.0, 1.0 - uu));
}

} // namespace sqsk
