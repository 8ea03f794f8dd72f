#include "sqsk/barrier.hpp"

#include "sqsk/errors.hpp"

#include <cmath>
#include <limits>

namespace sqsk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest positive root of a2 t^2 + a1 t + a0 given a0 > 0; +inf if none.
double first_positive_root(double a2, double a1, double a0)
{
    if (a2 == 0.0) return a1 < 0.0 ? -a0 / a1 : kInf;
    const double disc = a1 * a1 - 4.0 * a2 * a0;
    if (disc < 0.0) return kInf;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (a1 + std::copysign(sq, a1));
    double best = kInf;
    for (double r : {q / a2, q != 0.0 ? a0 / q : kInf})
        if (r > 0.0 && r < best) best = r;
    return best;
}

} // namespace

Matrix NewtonSystem::lift(const Matrix& W) const
{
    if (!split) return W;
    Matrix X(2 * n, W.cols());
    for (Index i = 0; i < n; ++i) {
        X.row(2 * i) = W.row(i);
        X.row(2 * i + 1) = -W.row(i);
    }
    return X;
}

Matrix NewtonSystem::lift_transpose(const Matrix& X) const
{
    if (!split) return X;
    Matrix W(n, X.cols());
    for (Index i = 0; i < n; ++i) W.row(i) = X.row(2 * i) - X.row(2 * i + 1);
    return W;
}

Vector NewtonSystem::apply(const Vector& v) const
{
    const Index ns = hss.rows();
    const Vector vx = v.head(nx());
    const Vector vs = v.tail(ns);
    const Vector vw = lift_transpose(vx);

    Vector hw = cone * vw;
    hw.noalias() += data_scale * (A->transpose() * (*A * vw));
    hw.noalias() += w_dyads * (w_dyads.transpose() * vw);
    hw.noalias() += w_border * vs;

    Vector out(size());
    out.head(nx()) = x_diag.cwiseProduct(vx) + lift(hw);
    out.tail(ns) = w_border.transpose() * vw + hss * vs;
    return out;
}

BlockDiagPlusLowRank NewtonSystem::xx_structured() const
{
    BlockDiagPlusLowRank H;
    H.blocks.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        if (split)
            H.add_block(cone + x_diag(2 * i), -cone, cone + x_diag(2 * i + 1));
        else
            H.add_scalar(cone);
    }

    std::vector<Index> rows;
    for (Index r = 0; r < A->rows(); ++r)
        if (A->row(r).squaredNorm() > 0.0) rows.push_back(r);

    const Index nr = static_cast<Index>(rows.size());
    Matrix W(n, nr + w_dyads.cols());
    const double root = std::sqrt(data_scale);
    for (Index j = 0; j < nr; ++j) W.col(j) = root * A->row(rows[static_cast<std::size_t>(j)]).transpose();
    W.rightCols(w_dyads.cols()) = w_dyads;

    H.factor = lift(W);
    H.signs.assign(static_cast<std::size_t>(W.cols()), 1.0);
    return H;
}

Matrix NewtonSystem::dense() const
{
    const Index N = size();
    Matrix H(N, N);
    for (Index j = 0; j < N; ++j) H.col(j) = apply(Vector::Unit(N, j));
    return H;
}

BarrierModel::BarrierModel(const Matrix& A, const Vector& b, double eps, double lam)
    : A_(A), b_(b), eps_(eps), lam_(lam), split_(lam > 0.0), has_tau_(eps > 0.0)
{
    if (A.rows() != b.size()) throw InputError("barrier: A and b disagree on row count");
    if (eps < 0.0 || lam < 0.0) throw InputError("barrier: eps and lam must be nonnegative");
    if (!split_ && !has_tau_)
        throw InputError("barrier: eps = lam = 0 is a least-squares problem, not a barrier problem");
}

double BarrierModel::barrier_parameter() const
{
    double nu = 2.0 + 1.0; // residual cone and log sigma
    if (has_tau_) nu += 3.0;
    if (split_) nu += 2.0 * static_cast<double>(n());
    return nu;
}

Vector BarrierModel::initial_point() const
{
    constexpr double delta = 0.5;
    Vector z = Vector::Zero(size());
    if (split_) z.head(nx()).setOnes();
    z(sigma_index()) = b_.norm() * (1.0 + delta) + 1.0;
    if (has_tau_) z(tau_index()) = 2.0 * std::sqrt(static_cast<double>(n())) * (1.0 + delta);
    return z;
}

Vector BarrierModel::weights(const Vector& z) const
{
    if (!split_) return z.head(n());
    Vector w(n());
    for (Index i = 0; i < n(); ++i) w(i) = z(2 * i) - z(2 * i + 1);
    return w;
}

bool BarrierModel::interior(const Vector& z) const
{
    return std::isfinite(value(z, 0.0));
}

double BarrierModel::value(const Vector& z, double gamma) const
{
    const Vector w = weights(z);
    const double sigma = z(sigma_index());
    if (!(sigma > 0.0)) return kInf;
    const double d2 = sigma * sigma - (A_ * w - b_).squaredNorm();
    if (!(d2 > 0.0)) return kInf;

    double f = gamma * sigma - std::log(d2) - std::log(sigma);
    if (has_tau_) {
        const double tau = z(tau_index());
        if (!(tau > 0.0)) return kInf;
        const double d1 = tau * tau - w.squaredNorm();
        if (!(d1 > 0.0)) return kInf;
        f += gamma * eps_ * tau - std::log(d1) - std::log(tau);
    }
    if (split_) {
        const auto x = z.head(nx());
        if (!(x.minCoeff() > 0.0)) return kInf;
        f += gamma * lam_ * x.sum() - x.array().log().sum();
    }
    return f;
}

Vector BarrierModel::gradient(const Vector& z, double gamma) const
{
    const Vector w = weights(z);
    const Vector r = A_ * w - b_;
    const double sigma = z(sigma_index());
    const double d2 = sigma * sigma - r.squaredNorm();

    Vector gw = (2.0 / d2) * (A_.transpose() * r);
    Vector g(size());
    g(sigma_index()) = gamma - 2.0 * sigma / d2 - 1.0 / sigma;
    if (has_tau_) {
        const double tau = z(tau_index());
        const double d1 = tau * tau - w.squaredNorm();
        gw += (2.0 / d1) * w;
        g(tau_index()) = gamma * eps_ - 2.0 * tau / d1 - 1.0 / tau;
    }
    if (split_) {
        for (Index i = 0; i < n(); ++i) {
            g(2 * i) = gw(i) + gamma * lam_ - 1.0 / z(2 * i);
            g(2 * i + 1) = -gw(i) + gamma * lam_ - 1.0 / z(2 * i + 1);
        }
    } else {
        g.head(n()) = gw;
    }
    return g;
}

namespace {

// Root of h(s) = c - 2 s / (s^2 - rho2) - 1 / s on (sqrt(rho2), inf). h is increasing
// and concave there, so Newton started left of the root climbs to it monotonically.
double slack_minimizer(double s, double rho2, double c)
{
    for (int it = 0; it < 100; ++it) {
        const double d = s * s - rho2;
        const double h = c - 2.0 * s / d - 1.0 / s;
        if (!(h < 0.0)) break;
        const double dh = 2.0 * (s * s + rho2) / (d * d) + 1.0 / (s * s);
        const double next = s - h / dh;
        if (!(next > s)) break;
        s = next;
        if (-h <= 1e-14 * std::abs(c) + 1e-300) break;
    }
    return s;
}

} // namespace

void BarrierModel::center_slacks(Vector& z, double gamma) const
{
    const Vector w = weights(z);
    z(sigma_index()) = slack_minimizer(z(sigma_index()), (A_ * w - b_).squaredNorm(), gamma);
    if (has_tau_) z(tau_index()) = slack_minimizer(z(tau_index()), w.squaredNorm(), gamma * eps_);
}

NewtonSystem BarrierModel::hessian(const Vector& z) const
{
    const Vector w = weights(z);
    const Vector r = A_ * w - b_;
    const double sigma = z(sigma_index());
    const double d2 = sigma * sigma - r.squaredNorm();
    const Index ns = has_tau_ ? 2 : 1;

    NewtonSystem H;
    H.split = split_;
    H.n = n();
    H.A = &A_;
    H.data_scale = 2.0 / d2;
    H.x_diag = split_ ? Vector(z.head(nx()).array().square().inverse()) : Vector::Zero(nx());
    H.w_dyads.resize(n(), ns);
    H.w_border = Matrix::Zero(n(), ns);
    H.hss = Matrix::Zero(ns, ns);
    H.w = w;
    H.residual = r;
    H.sigma = sigma;
    H.s_dyads.resize(ns);
    H.s_diag.resize(ns);

    // residual cone: (2/d2) [A^T A, 0; 0, -1] + h h^T with h = (2 A^T r, -2 sigma) / d2
    const Vector h2w = (2.0 / d2) * (A_.transpose() * r);
    const double h2s = -2.0 * sigma / d2;
    H.w_dyads.col(0) = h2w;
    H.w_border.col(0) = h2w * h2s;
    H.s_dyads(0) = h2s;
    H.s_diag(0) = -2.0 / d2 + 1.0 / (sigma * sigma);
    H.hss(0, 0) = H.s_diag(0) + h2s * h2s;

    if (has_tau_) {
        const double tau = z(tau_index());
        const double d1 = tau * tau - w.squaredNorm();
        const Vector h1w = (2.0 / d1) * w;
        const double h1t = -2.0 * tau / d1;
        H.tau = tau;
        H.cone = 2.0 / d1;
        H.w_dyads.col(1) = h1w;
        H.w_border.col(1) = h1w * h1t;
        H.s_dyads(1) = h1t;
        H.s_diag(1) = -2.0 / d1 + 1.0 / (tau * tau);
        H.hss(1, 1) = H.s_diag(1) + h1t * h1t;
    }
    return H;
}

Vector BarrierModel::split_newton_direction(const Vector& z, const Vector& g) const
{
    if (!split_) throw InputError("split_newton_direction: model has no p/q split");
    const Index nn = n();
    const Index rows = A_.rows();
    const Index nxx = nx();

    const Vector w = weights(z);
    const Vector r = A_ * w - b_;
    const double sigma = z(sigma_index());
    const double d2 = sigma * sigma - r.squaredNorm();

    Vector pi(nn);
    for (Index i = 0; i < nn; ++i) pi(i) = z(2 * i) * z(2 * i) + z(2 * i + 1) * z(2 * i + 1);

    // v = D^{-1} (-g) for the diagonal log terms; t = L v for both cones.
    const Vector x2 = z.head(nxx).array().square();
    Vector v(size());
    v.head(nxx) = -x2.cwiseProduct(g.head(nxx));
    v(sigma_index()) = -sigma * sigma * g(sigma_index());
    Vector sv(nn);
    for (Index i = 0; i < nn; ++i) sv(i) = v(2 * i) - v(2 * i + 1);

    Vector tA(rows + 1);
    tA(0) = v(sigma_index());
    tA.tail(rows) = A_ * sv;

    // Capacitance block of the residual cone: -(d2/2) J + x x^T + diag(sigma^2, A Pi A^T).
    Matrix S(rows + 1, rows + 1);
    Vector xa(rows + 1);
    xa << sigma, r;
    S = xa * xa.transpose();
    S(0, 0) += sigma * sigma - 0.5 * d2;
    S.bottomRightCorner(rows, rows).diagonal().array() += 0.5 * d2;

    Vector yT;
    Vector tT;
    Vector Ew;
    double E0 = 0.0;
    double rho = 1.0;
    Vector xt;
    if (has_tau_) {
        const double tau = z(tau_index());
        v(tau_index()) = -tau * tau * g(tau_index());
        const double d1 = tau * tau - w.squaredNorm();
        tT.resize(nn + 1);
        tT(0) = v(tau_index());
        tT.tail(nn) = sv;

        // C_tt = diag(E0, Ew) + xt xt^T, with E0 = tau^2 - d1/2 and Ew = Pi + d1/2.
        E0 = 0.5 * (tau * tau + w.squaredNorm());
        Ew = pi.array() + 0.5 * d1;
        xt.resize(nn + 1);
        xt << tau, w;
        rho = 1.0 + tau * tau / E0 + w.cwiseProduct(Ew.cwiseInverse()).dot(w);

        // Eliminating the tau-cone block: A Pi (Pi + d1/2)^{-1} Pi A^T cancels against
        // A Pi A^T in closed form, leaving A diag(Pi d1 / (2 Ew)) A^T plus a dyad.
        const Vector harmonic = pi.cwiseProduct(Ew.cwiseInverse()) * (0.5 * d1);
        S.bottomRightCorner(rows, rows).noalias() += A_ * harmonic.asDiagonal() * A_.transpose();
        const Vector a = A_ * pi.cwiseProduct(Ew.cwiseInverse()).cwiseProduct(w);
        S.bottomRightCorner(rows, rows).noalias() += a * a.transpose() / rho;
    } else {
        S.bottomRightCorner(rows, rows).noalias() += A_ * pi.asDiagonal() * A_.transpose();
    }

    auto ctt_solve = [&](const Vector& t) -> Vector {
        Vector e(nn + 1);
        e(0) = t(0) / E0;
        e.tail(nn) = t.tail(nn).cwiseProduct(Ew.cwiseInverse());
        Vector ex(nn + 1);
        ex(0) = xt(0) / E0;
        ex.tail(nn) = xt.tail(nn).cwiseProduct(Ew.cwiseInverse());
        return e - ex * (xt.dot(e) / rho);
    };

    Vector rhsA = tA;
    Vector cT;
    if (has_tau_) {
        cT = ctt_solve(tT);
        rhsA.tail(rows) -= A_ * pi.cwiseProduct(cT.tail(nn));
    }
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success) throw NumericalError("split_newton_direction: capacitance is not positive definite");
    const Vector yA = llt.solve(rhsA);

    Vector u = A_.transpose() * yA.tail(rows);
    double y_tau0 = 0.0;
    if (has_tau_) {
        Vector back = tT;
        back.tail(nn) -= pi.cwiseProduct(A_.transpose() * yA.tail(rows));
        yT = ctt_solve(back);
        u += yT.tail(nn);
        y_tau0 = yT(0);
    }

    Vector dz = v;
    for (Index i = 0; i < nn; ++i) {
        dz(2 * i) -= x2(2 * i) * u(i);
        dz(2 * i + 1) += x2(2 * i + 1) * u(i);
    }
    dz(sigma_index()) -= sigma * sigma * yA(0);
    if (has_tau_) {
        const double tau = z(tau_index());
        dz(tau_index()) -= tau * tau * y_tau0;
    }
    if (!dz.allFinite()) throw NumericalError("split_newton_direction: non-finite step");
    return dz;
}

double BarrierModel::max_step(const Vector& z, const Vector& dz) const
{
    double alpha = kInf;
    auto positive = [&](double v, double dv) {
        if (dv < 0.0) alpha = std::min(alpha, -v / dv);
    };

    if (split_)
        for (Index i = 0; i < nx(); ++i) positive(z(i), dz(i));
    const Index si = sigma_index();
    positive(z(si), dz(si));

    const Vector w = weights(z);
    const Vector dw = weights(dz);
    {
        const Vector r = A_ * w - b_;
        const Vector dr = A_ * dw;
        const double s = z(si);
        const double ds = dz(si);
        alpha = std::min(alpha, first_positive_root(ds * ds - dr.squaredNorm(), 2.0 * (s * ds - r.dot(dr)),
                                                    s * s - r.squaredNorm()));
    }
    if (has_tau_) {
        const Index ti = tau_index();
        positive(z(ti), dz(ti));
        const double t = z(ti);
        const double dt = dz(ti);
        alpha = std::min(alpha, first_positive_root(dt * dt - dw.squaredNorm(), 2.0 * (t * dt - w.dot(dw)),
                                                    t * t - w.squaredNorm()));
    }
    return alpha;
}

} // namespace sqsk
