#include "sqsk/solver.hpp"

#include "sqsk/barrier.hpp"
#include "sqsk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

namespace sqsk {

namespace {

constexpr double kDecrementTol = 1e-8;
constexpr double kArmijo = 0.01;
constexpr double kBacktrack = 0.5;
constexpr double kBoundaryFraction = 0.99;
constexpr double kMinStep = 1e-14;
constexpr double kStallStep = 1e-10;
constexpr double kPolishTol = 1e-20;
constexpr int kPolishSteps = 20;
constexpr int kPolishNewton = 30;
constexpr double kQuadraticRegion = 1e-3;
constexpr int kExtraPasses = 3;
constexpr double kCgTol = 1e-14;
constexpr double kCgAcceptTol = 1e-9;
constexpr Index kCgMaxIter = 2000;
constexpr int kRefineSweeps = 3;

double soft_norm(const Vector& g, double lam)
{
    return (g - g.cwiseMax(-lam).cwiseMin(lam)).norm();
}

// Largest theta in [0, 1] with ||soft(theta g, lam)||_2 <= limit.
double feasible_scale(const Vector& g, double lam, double limit)
{
    if (soft_norm(g, lam) <= limit) return 1.0;
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
        const double mid = 0.5 * (lo + hi);
        (soft_norm(mid * g, lam) <= limit ? lo : hi) = mid;
    }
    return lo;
}

// Woodbury on H_xx plus a Schur complement on the slacks. Fast but loses
// accuracy at large gamma; only used when CG fails.
class BorderedSolver
{
public:
    explicit BorderedSolver(const NewtonSystem& H)
        : H_(H), B_(H.lift(H.w_border)), F_(H.xx_structured())
    {
        Y_ = F_.solve(B_);
        lu_.compute(Matrix(H.hss - B_.transpose() * Y_));
    }

    Vector solve(const Vector& rhs) const
    {
        const Index nx = H_.nx();
        const Index ns = H_.hss.rows();
        const Vector y0 = F_.solve(Vector(rhs.head(nx)));
        const Vector ds = lu_.solve(Vector(rhs.tail(ns) - B_.transpose() * y0));
        Vector out(nx + ns);
        out.head(nx) = y0 - Y_ * ds;
        out.tail(ns) = ds;
        if (!out.allFinite()) throw NumericalError("newton: non-finite step");
        return out;
    }

private:
    const NewtonSystem& H_;
    Matrix B_;
    StructuredFactorization F_;
    Matrix Y_;
    Eigen::FullPivLU<Matrix> lu_;
};

// Dense baseline: eliminates the slacks and forms the n x n Schur complement
// explicitly, O(rows(A) n^2). With the split, each pair (p_i, q_i) is condensed
// onto u_i = dz_p,i - dz_q,i as well; the 2n x 2n form is nearly singular along
// p + q once gamma is large.
//
// Eliminating sigma from the residual cone leaves, with r = A w - b, rho = ||r||,
// d = sigma^2 - rho^2, a = A^T r / rho and B = A - (r / rho) a^T,
//     (2 / d) B^T B + kappa a a^T,   kappa = 2 (3 sigma^2 + rho^2) / (3 sigma^4 + rho^4),
// which avoids the order gamma^2 dyads and their cancellation. The norm cone
// gives (2 / d1) I - 4 (omega^2 + tau^2) / (d1 (3 tau^4 + omega^4)) w w^T with
// omega = ||w||; that rank-1 downdate goes through Woodbury.
class CondensedSolver
{
public:
    explicit CondensedSolver(const NewtonSystem& H) : H_(H)
    {
        const Index n = H.n;
        const Matrix& A = *H.A;
        const double sigma = H.sigma;
        const double rho2 = H.residual.squaredNorm();
        const double rho = std::sqrt(rho2);
        const double d2 = (sigma - rho) * (sigma + rho);

        S_ = Matrix::Zero(n, n);
        if (rho > 0.0) {
            const Vector rhat = H.residual / rho;
            const Vector a = A.transpose() * rhat;
            const Matrix B = A - rhat * a.transpose();
            S_.selfadjointView<Eigen::Lower>().rankUpdate(B.transpose(), 2.0 / d2);
            const double kappa = 2.0 * (3.0 * sigma * sigma + rho2) / (3.0 * sigma * sigma * sigma * sigma + rho2 * rho2);
            S_.selfadjointView<Eigen::Lower>().rankUpdate(a, kappa);
        } else {
            S_.selfadjointView<Eigen::Lower>().rankUpdate(A.transpose(), 2.0 / d2);
        }
        S_.triangularView<Eigen::StrictlyUpper>() = S_.transpose();
        S_.diagonal().array() += H.cone;
        if (H.split) {
            hp_ = H.x_diag(Eigen::seq(0, H.nx() - 1, 2));
            hq_ = H.x_diag(Eigen::seq(1, H.nx() - 1, 2));
            harm_ = hp_.cwiseProduct(hq_).cwiseQuotient(hp_ + hq_);
            S_.diagonal() += harm_;
        }
        llt_.compute(S_);
        if (llt_.info() != Eigen::Success) throw NumericalError("newton: condensed system not positive definite");

        if (H.hss.rows() > 1) {
            const double tau = H.tau;
            const double om2 = H.w.squaredNorm();
            const double d1 = tau * tau - om2;
            const double coef = 4.0 * (om2 + tau * tau) / (d1 * (3.0 * tau * tau * tau * tau + om2 * om2));
            down_ = std::sqrt(coef) * H.w;
            sinv_down_ = llt_.solve(down_);
            cap_ = 1.0 - down_.dot(sinv_down_);
        }
        border_ = H.w_border * H.hss.diagonal().cwiseInverse().asDiagonal();
    }

    Vector solve(const Vector& r) const
    {
        const Index n = H_.n;
        const Index nx = H_.nx();
        const Index ns = H_.hss.rows();
        const auto even = Eigen::seq(0, nx - 1, 2);
        const auto odd = Eigen::seq(1, nx - 1, 2);

        Vector rw = H_.split ? Vector(harm_.cwiseProduct(r(even).cwiseQuotient(hp_) - r(odd).cwiseQuotient(hq_)))
                             : Vector(r.head(n));
        const Vector rs = r.tail(ns);
        rw -= border_ * rs;
        Vector u = llt_.solve(rw);
        if (down_.size() > 0) u += sinv_down_ * (down_.dot(u) / cap_);
        const Vector ds = (rs - H_.w_border.transpose() * u).cwiseQuotient(H_.hss.diagonal());

        Vector dz(nx + ns);
        dz.tail(ns) = ds;
        if (H_.split) {
            // The two rows of a pair share the coupling with opposite signs, so their
            // sum hp dz_p + hq dz_q = r_p + r_q and dz_p - dz_q = u fix both.
            const Vector dp = (r(even) + r(odd) + hq_.cwiseProduct(u)).cwiseQuotient(hp_ + hq_);
            dz(even) = dp;
            dz(odd) = dp - u;
        } else {
            dz.head(n) = u;
        }
        if (!dz.allFinite()) throw NumericalError("newton: non-finite step");
        return dz;
    }

private:
    const NewtonSystem& H_;
    Matrix S_;
    Vector hp_, hq_, harm_;
    Eigen::LLT<Matrix> llt_;
    Vector down_, sinv_down_;
    double cap_ = 1.0;
    Matrix border_; // w_border hss^{-1}
};

// Preconditioned CG on H dz = -g. Returns false when CG stalls above the
// acceptance tolerance.
template <typename Precondition>
bool pcg_solve(const NewtonSystem& H, const Vector& g, const Precondition& precondition, int max_iter, Vector& dz)
{
    const Index N = H.size();
    const double target = kCgTol * g.norm();
    Vector x = Vector::Zero(N);
    Vector r = -g;
    Vector z = precondition(r);
    Vector p = z;
    double rz = r.dot(z);
    for (int it = 0; it < max_iter; ++it) {
        const Vector Hp = H.apply(p);
        const double pHp = p.dot(Hp);
        if (!(pHp > 0.0)) break;
        const double a = rz / pHp;
        x += a * p;
        r -= a * Hp;
        if (r.norm() <= target) {
            dz = std::move(x);
            return dz.allFinite();
        }
        z = precondition(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    // Accept a slightly less accurate solve rather than fall back.
    if (x.allFinite() && (-g - H.apply(x)).norm() <= kCgAcceptTol * g.norm()) {
        dz = std::move(x);
        return true;
    }
    return false;
}

// The 2x2 (or 1x1) diagonal blocks of H as preconditioner. H is that block
// diagonal plus a matrix of rank rows(A) + 2, so CG needs few iterations, and
// unlike Woodbury it keeps its accuracy when gamma is large and H has entries
// of order gamma^2.
bool pcg_direction(const NewtonSystem& H, const Vector& g, Vector& dz)
{
    const Index n = H.n;
    const Index nx = H.nx();
    const Index ns = H.hss.rows();
    const Index N = nx + ns;

    // Diagonal of cone I + data_scale A^T A + Y Y^T.
    Vector m = Vector::Constant(n, H.cone);
    m += H.data_scale * H.A->colwise().squaredNorm().transpose();
    m += H.w_dyads.rowwise().squaredNorm();

    std::vector<Eigen::Matrix2d> blocks;
    if (H.split) {
        blocks.resize(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) {
            Eigen::Matrix2d b;
            b << H.x_diag(2 * i) + m(i), -m(i), -m(i), H.x_diag(2 * i + 1) + m(i);
            blocks[static_cast<std::size_t>(i)] = b.inverse();
        }
    }
    const Eigen::MatrixXd hss_inv = H.hss.inverse();
    auto precondition = [&](const Vector& r) {
        Vector out(N);
        if (H.split) {
            for (Index i = 0; i < n; ++i) out.segment<2>(2 * i) = blocks[static_cast<std::size_t>(i)] * r.segment<2>(2 * i);
        } else {
            out.head(n) = r.head(n).cwiseQuotient(m);
        }
        out.tail(ns) = hss_inv * r.tail(ns);
        return out;
    };
    const int max_iter = static_cast<int>(std::min<Index>(4 * N + 100, kCgMaxIter));
    return pcg_solve(H, g, precondition, max_iter, dz);
}

// Direct condensed solve plus iterative refinement, kept only while it shrinks
// the residual; O(rows(A) n) per sweep on top of the factorization.
Vector dense_direction(const NewtonSystem& H, const Vector& g)
{
    const CondensedSolver solver(H);
    Vector dz = solver.solve(-g);
    double res = (g + H.apply(dz)).norm();
    for (int sweep = 0; sweep < kRefineSweeps && res > kCgTol * g.norm(); ++sweep) {
        const Vector next = dz + solver.solve(-g - H.apply(dz));
        const double next_res = (g + H.apply(next)).norm();
        if (!(next_res < res)) break;
        dz = next;
        res = next_res;
    }
    return dz;
}

Vector newton_direction(const BarrierModel& model, const Vector& g, const Vector& z, NewtonStrategy strategy)
{
    const NewtonSystem H = model.hessian(z);
    if (strategy == NewtonStrategy::dense) return dense_direction(H, g);

    Vector dz;
    if (pcg_direction(H, g, dz)) return dz;
    if (model.split()) return model.split_newton_direction(z, g);
    return BorderedSolver(H).solve(-g);
}

struct BarrierResult
{
    Vector w;
    int iterations = 0;
    SolveStatus status = SolveStatus::converged;
};

BarrierResult run_barrier(const GeneralizedInstance& inst, const SolverConfig& cfg, NewtonStrategy strategy,
                          SolveTrace* trace)
{
    const BarrierModel model(inst.A, inst.b, inst.eps, inst.lam);
    const double nu = model.barrier_parameter();

    BarrierResult out;
    Vector z = model.initial_point();
    double gamma = 1.0;
    int extra_passes = 0;
    double dec_tol = kDecrementTol;

    try {
        while (true) {
            double last_decrement = std::numeric_limits<double>::infinity();
            int polish_steps = 0;
            for (;;) {
                if (out.iterations >= cfg.max_newton) {
                    out.status = SolveStatus::max_iter;
                    out.w = model.weights(z);
                    return out;
                }
                const Vector g = model.gradient(z, gamma);
                const Vector dz = newton_direction(model, g, z, strategy);
                const double slope = g.dot(dz);
                const double decrement = -0.5 * slope;
                if (!(decrement > dec_tol)) break;
                if (dec_tol <= kPolishTol) {
                    // Stop once roundoff dominates: the decrement no longer shrinks.
                    if (decrement > 0.5 * last_decrement || ++polish_steps > kPolishSteps) break;
                    last_decrement = decrement;
                }

                const double amax = model.max_step(z, dz);
                double t = std::min(1.0, kBoundaryFraction * amax);
                const double phi0 = model.value(z, gamma);
                double phi = model.value(z + t * dz, gamma);
                while (!(phi <= phi0 + kArmijo * t * slope) && t > kMinStep) {
                    t *= kBacktrack;
                    phi = model.value(z + t * dz, gamma);
                }
                if (!(phi <= phi0 + kArmijo * t * slope)) {
                    // Near the center phi differences drown in roundoff of gamma * objective.
                    // Inside the quadratic region a full (boundary-capped) Newton step is safe.
                    if (decrement >= kQuadraticRegion) break;
                    t = std::min(1.0, kBoundaryFraction * amax);
                    phi = model.value(z + t * dz, gamma);
                    if (!std::isfinite(phi)) break;
                }

                // Tiny steps only pass the line search on roundoff; the pass has stalled.
                if (t < kStallStep) break;
                z += t * dz;
                model.center_slacks(z, gamma);
                ++out.iterations;
                if (trace) trace->steps.push_back({gamma, phi0, model.value(z, gamma), decrement, t});
            }
            const Vector w_pass = model.weights(z);
            const double obj_pass = inst.objective(w_pass);
            if (obj_pass - general_dual_bound(inst, w_pass) <= cfg.tol * (1.0 + obj_pass)) break;
            if (nu / gamma < cfg.tol) {
                // The residual-direction certificate is sensitive to centering error on inactive
                // features, so re-center tightly before falling back to a larger gamma.
                if (extra_passes >= kExtraPasses) break;
                if (dec_tol > kPolishTol) {
                    dec_tol = kPolishTol;
                    continue;
                }
                ++extra_passes;
            }
            gamma *= cfg.mu;
        }
    } catch (const NumericalError&) {
        out.status = SolveStatus::numerical;
    }
    out.w = model.weights(z);
    return out;
}

// Exact minimizer on a fixed support and sign pattern: the objective is smooth
// there, so a few Newton steps reach full precision and leave true zeros elsewhere.
// Returns nothing when the pattern is not self-consistent.
std::optional<Vector> polish_support(const GeneralizedInstance& inst, const Vector& w)
{
    const std::vector<Index> S = support_of(w);
    const Index p = static_cast<Index>(S.size());
    if (p == 0) return Vector::Zero(inst.n());

    Matrix AS(inst.A.rows(), p);
    Vector x(p);
    Vector sgn(p);
    for (Index j = 0; j < p; ++j) {
        const Index i = S[static_cast<std::size_t>(j)];
        AS.col(j) = inst.A.col(i);
        x(j) = w(i);
        sgn(j) = w(i) > 0.0 ? 1.0 : -1.0;
    }
    const auto smooth = [&](const Vector& v) {
        return (AS * v - inst.b).norm() + inst.eps * v.norm() + inst.lam * sgn.dot(v);
    };
    const double floor = 1e-13 * (1.0 + inst.b.norm());

    double f = smooth(x);
    for (int it = 0; it < kPolishNewton; ++it) {
        const Vector r = AS * x - inst.b;
        const double rn = r.norm();
        const double xn = x.norm();
        if (rn < floor || xn == 0.0) return std::nullopt;

        const Vector rhat = r / rn;
        const Matrix Ar = AS.transpose() * rhat;
        Vector grad = Ar + inst.lam * sgn;
        Matrix H = (AS.transpose() * AS - Ar * Ar.transpose()) / rn;
        if (inst.eps > 0.0) {
            grad += inst.eps * x / xn;
            H += inst.eps / xn * (Matrix::Identity(p, p) - x * x.transpose() / (xn * xn));
        }
        const Vector dx = -H.completeOrthogonalDecomposition().solve(grad);
        if (!dx.allFinite()) return std::nullopt;

        double t = 1.0;
        for (Index j = 0; j < p; ++j)
            if (x(j) * dx(j) < 0.0) t = std::min(t, kBoundaryFraction * -x(j) / dx(j));
        double ft = smooth(x + t * dx);
        while (!(ft < f) && t > kMinStep) {
            t *= kBacktrack;
            ft = smooth(x + t * dx);
        }
        if (!(ft < f)) break;
        x += t * dx;
        f = ft;
    }

    Vector out = Vector::Zero(inst.n());
    for (Index j = 0; j < p; ++j) out(S[static_cast<std::size_t>(j)]) = x(j);
    return out;
}

Solution finish(const GeneralizedInstance& inst, Vector w, int iterations, SolveStatus status)
{
    Solution sol;
    sol.w = std::move(w);
    sol.objective = inst.objective(sol.w);
    sol.support = support_of(sol.w);
    sol.iterations = iterations;
    sol.status = status;
    sol.gap = std::max(0.0, sol.objective - general_dual_bound(inst, sol.w));
    return sol;
}

} // namespace

std::string to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::numerical: return "numerical";
    }
    return "unknown";
}

double GeneralizedInstance::objective(const Vector& w) const
{
    return (A * w - b).norm() + eps * w.norm() + lam * w.lpNorm<1>();
}

void GeneralizedInstance::validate() const
{
    if (A.rows() == 0 || A.cols() == 0) throw InputError("instance: A is empty");
    if (A.rows() != b.size()) throw InputError("instance: A and b disagree on row count");
    if (!(eps >= 0.0) || !(lam >= 0.0) || !std::isfinite(eps) || !std::isfinite(lam))
        throw InputError("instance: eps and lam must be finite and nonnegative");
    if (!A.allFinite() || !b.allFinite()) throw InputError("instance: non-finite data");
}

GeneralizedInstance to_instance(const ReducedProblem& rp, double eps, double lam)
{
    GeneralizedInstance inst;
    inst.A = Matrix::Zero(rp.rank() + 1, rp.n_features());
    inst.A.topRows(rp.rank()) = rp.R.transpose();
    inst.b.resize(rp.rank() + 1);
    inst.b << rp.c, rp.s;
    inst.eps = eps;
    inst.lam = lam;
    return inst;
}

double support_tol(const Vector& w)
{
    return 1e-6 * std::max(1.0, inf_norm(w));
}

std::vector<Index> support_of(const Vector& w)
{
    const double tol = support_tol(w);
    std::vector<Index> out;
    for (Index i = 0; i < w.size(); ++i)
        if (std::abs(w(i)) > tol) out.push_back(i);
    return out;
}

double general_dual_bound(const GeneralizedInstance& inst, const Vector& w)
{
    const Vector r = inst.A * w - inst.b;
    const double rn = r.norm();
    if (rn == 0.0) return 0.0;

    // Rows of A that vanish leave their dual coordinates unconstrained; those
    // coordinates take the leftover norm budget along b.
    const Index rows = inst.A.rows();
    std::vector<Index> live;
    double free_b2 = 0.0;
    for (Index i = 0; i < rows; ++i) {
        if (inst.A.row(i).squaredNorm() > 0.0)
            live.push_back(i);
        else
            free_b2 += inst.b(i) * inst.b(i);
    }
    const double s = std::sqrt(free_b2);

    Vector alpha = Vector::Zero(rows);
    for (Index i : live) alpha(i) = -r(i) / rn;
    const double u = alpha.norm();
    if (u == 0.0) return s;

    const Vector g = inst.A.transpose() * alpha;
    const double a = alpha.dot(inst.b);
    double theta = feasible_scale(g, inst.lam, inst.eps + 1e-12 * (1.0 + g.norm()));
    // theta a + s sqrt(1 - theta^2 u^2) is concave in theta; clamp at its maximizer.
    const double au = a / u;
    const double best = au > 0.0 ? au / std::sqrt(au * au + s * s) / u : 0.0;
    theta = std::min(theta, best);
    return theta * a + s * std::sqrt(std::max(0.0, 1.0 - theta * theta * u * u));
}

Solution solve_instance(const GeneralizedInstance& inst, const SolverConfig& cfg, NewtonStrategy strategy,
                        SolveTrace* trace)
{
    inst.validate();
    if (!(cfg.tol > 0.0) || !(cfg.mu > 1.0) || cfg.max_newton < 1)
        throw InputError("solver: need tol > 0, mu > 1 and max_newton >= 1");

    const Index n = inst.n();
    std::vector<Index> kept;
    for (Index i = 0; i < n; ++i)
        if (!cfg.screen || inst.lam <= inst.eps || inst.A.col(i).norm() > inst.lam - inst.eps) kept.push_back(i);

    Vector w = Vector::Zero(n);
    if (kept.empty()) return finish(inst, w, 0, SolveStatus::converged);

    GeneralizedInstance sub;
    const Index nk = static_cast<Index>(kept.size());
    if (nk == n) {
        sub = inst;
    } else {
        sub.A.resize(inst.A.rows(), nk);
        for (Index j = 0; j < nk; ++j) sub.A.col(j) = inst.A.col(kept[static_cast<std::size_t>(j)]);
        sub.b = inst.b;
        sub.eps = inst.eps;
        sub.lam = inst.lam;
    }

    Vector wk;
    int iterations = 0;
    SolveStatus status = SolveStatus::converged;
    if (sub.eps == 0.0 && sub.lam == 0.0) {
        // Plain least squares; the minimum-norm solution is one of the minimizers.
        wk = sub.A.completeOrthogonalDecomposition().solve(sub.b);
    } else {
        BarrierResult br = run_barrier(sub, cfg, strategy, trace);
        wk = std::move(br.w);
        iterations = br.iterations;
        status = br.status;
    }
    for (Index j = 0; j < nk; ++j) w(kept[static_cast<std::size_t>(j)]) = wk(j);
    Solution sol = finish(inst, std::move(w), iterations, status);
    if (inst.lam > 0.0 && status == SolveStatus::converged) {
        if (auto pw = polish_support(inst, sol.w)) {
            Solution alt = finish(inst, std::move(*pw), iterations, status);
            const double slack = 1e-14 * (1.0 + sol.objective);
            if (alt.objective <= sol.objective + slack && alt.gap <= sol.gap + slack) return alt;
        }
    }
    return sol;
}

Solution solve_reduced(const ReducedProblem& rp, double eps, double lam, const SolverConfig& cfg, SolveTrace* trace)
{
    if (rp.c.size() != rp.rank()) throw InputError("solve_reduced: c and R disagree on rank");
    const GeneralizedInstance inst = to_instance(rp, eps, lam);
    Solution sol = solve_instance(inst, cfg, NewtonStrategy::structured, trace);
    // The reduced dual keeps the sqrt(1 - u^T u) term and is never weaker.
    const DualPoint dp = dual_certificate(rp, sol.w, eps, lam);
    if (dp.feasible) sol.gap = std::min(sol.gap, std::max(0.0, sol.objective - dp.value));
    return sol;
}

Solution solve_full(const DataMatrix& X, const Vector& y, double lam, const SolverConfig& cfg)
{
    if (X.cols() != y.size()) {
        std::ostringstream os;
        os << "solve_full: X has " << X.cols() << " observations but y has length " << y.size();
        throw InputError(os.str());
    }
    GeneralizedInstance inst;
    inst.A = X.dense().transpose();
    inst.b = y;
    inst.eps = 0.0;
    inst.lam = lam;
    return solve_instance(inst, cfg, NewtonStrategy::dense);
}

Solution reference_solve(const GeneralizedInstance& inst, int iters, std::uint64_t seed)
{
    inst.validate();
    if (iters < 1) throw InputError("reference_solve: iters must be >= 1");

    const Index n = inst.n();
    const double eps = inst.eps;
    const double lam = inst.lam;

    auto smooth = [&](const Vector& w) { return (inst.A * w - inst.b).norm(); };
    auto grad = [&](const Vector& w) -> Vector {
        const Vector r = inst.A * w - inst.b;
        const double rn = r.norm();
        return rn > 0.0 ? Vector(inst.A.transpose() * r / rn) : Vector(Vector::Zero(n));
    };
    auto prox = [&](const Vector& v, double t) -> Vector {
        Vector x = (v.array().abs() - t * lam).max(0.0) * v.array().sign();
        const double xn = x.norm();
        if (xn > 0.0) x *= std::max(0.0, 1.0 - t * eps / xn);
        return x;
    };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1e-3);
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = nd(rng);

    Vector best = Vector::Zero(n);
    double best_obj = inst.objective(best);
    Vector y = x;
    Vector x_prev = x;
    double t_mom = 1.0;
    double L = std::max(1e-12, inst.A.squaredNorm() / std::max(1e-12, inst.b.norm()));
    double f_prev = inst.objective(x);
    int done = 0;

    for (int it = 1; it <= iters; ++it) {
        done = it;
        const double fy = smooth(y);
        const Vector gy = grad(y);
        Vector x_new;
        for (int bt = 0; bt < 100; ++bt) {
            x_new = prox(y - gy / L, 1.0 / L);
            const Vector d = x_new - y;
            if (smooth(x_new) <= fy + gy.dot(d) + 0.5 * L * d.squaredNorm() + 1e-15 * std::abs(fy)) break;
            L *= 2.0;
        }
        const double f_new = inst.objective(x_new);
        if (f_new < best_obj) {
            best_obj = f_new;
            best = x_new;
        }

        if (f_new > f_prev) {
            // Adaptive restart: drop momentum.
            t_mom = 1.0;
            y = best;
            x_prev = best;
            f_prev = best_obj;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
        y = x_new + ((t_mom - 1.0) / t_next) * (x_new - x_prev);
        x_prev = x_new;
        t_mom = t_next;
        f_prev = f_new;
        L *= 0.95;

        if (it % 200 == 0) {
            const double gap = best_obj - general_dual_bound(inst, best);
            if (gap <= 1e-11 * (1.0 + best_obj)) break;
        }
    }
    return finish(inst, best, done, SolveStatus::converged);
}

} // namespace sqsk
