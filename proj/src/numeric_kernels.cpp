#include "sqsk/numeric_kernels.hpp"

#include "sqsk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sqsk {

namespace {

constexpr double kAbsFloor = 1e-14;

} // namespace

SymEig sym_eig(const Matrix& S)
{
    if (S.rows() != S.cols()) {
        std::ostringstream os;
        os << "sym_eig: matrix is " << S.rows() << "x" << S.cols() << ", expected square";
        throw InputError(os.str());
    }
    if (!S.allFinite()) throw InputError("sym_eig: matrix has non-finite entries");

    const double scale = S.norm();
    const double asym = (S - S.transpose()).norm();
    if (asym > 1e-10 * scale + kAbsFloor) {
        std::ostringstream os;
        os << "sym_eig: matrix is not symmetric (||S - S^T|| = " << asym << ", ||S|| = " << scale << ")";
        throw InputError(os.str());
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
    if (es.info() != Eigen::Success) throw NumericalError("sym_eig: eigensolver did not converge");

    // Eigen returns ascending order.
    SymEig out;
    out.values = es.eigenvalues().reverse();
    out.vectors = es.eigenvectors().rowwise().reverse();
    return out;
}

PsdRoots psd_sqrt_invsqrt(const Matrix& K, double rank_tol)
{
    const SymEig eig = sym_eig(K);
    const Index k = K.rows();
    PsdRoots out;
    out.half = Matrix::Zero(k, k);
    out.inv_half = Matrix::Zero(k, k);
    if (k == 0) return out;

    const double lmax = std::max(eig.values(0), 0.0);
    const double cut = std::max(rank_tol * lmax, kAbsFloor * kAbsFloor);
    if (eig.values(k - 1) < -std::max(rank_tol * lmax, kAbsFloor)) {
        std::ostringstream os;
        os << "psd_sqrt_invsqrt: matrix is indefinite (min eigenvalue " << eig.values(k - 1)
           << ", max " << eig.values(0) << ")";
        throw NumericalError(os.str());
    }

    Vector h = Vector::Zero(k);
    Vector ih = Vector::Zero(k);
    for (Index i = 0; i < k; ++i) {
        if (eig.values(i) > cut) {
            h(i) = std::sqrt(eig.values(i));
            ih(i) = 1.0 / h(i);
            ++out.rank;
        }
    }
    const Matrix& V = eig.vectors;
    out.half = V * h.asDiagonal() * V.transpose();
    out.inv_half = V * ih.asDiagonal() * V.transpose();
    return out;
}

Index BlockDiagPlusLowRank::size() const
{
    Index n = 0;
    for (const auto& b : blocks) n += b.size();
    return n;
}

Vector BlockDiagPlusLowRank::apply(const Vector& x) const
{
    Vector y(x.size());
    Index off = 0;
    for (const auto& b : blocks) {
        if (b.scalar) {
            y(off) = b.a * x(off);
            off += 1;
        } else {
            y(off) = b.a * x(off) + b.b * x(off + 1);
            y(off + 1) = b.b * x(off) + b.c * x(off + 1);
            off += 2;
        }
    }
    if (factor.cols() > 0) {
        Vector t = factor.transpose() * x;
        for (Index j = 0; j < t.size(); ++j) t(j) *= signs[static_cast<std::size_t>(j)];
        y.noalias() += factor * t;
    }
    return y;
}

Matrix BlockDiagPlusLowRank::dense() const
{
    const Index n = size();
    Matrix H = Matrix::Zero(n, n);
    Index off = 0;
    for (const auto& b : blocks) {
        H(off, off) = b.a;
        if (!b.scalar) {
            H(off, off + 1) = b.b;
            H(off + 1, off) = b.b;
            H(off + 1, off + 1) = b.c;
        }
        off += b.size();
    }
    for (Index j = 0; j < factor.cols(); ++j)
        H.noalias() += signs[static_cast<std::size_t>(j)] * factor.col(j) * factor.col(j).transpose();
    return H;
}

StructuredFactorization::StructuredFactorization(const BlockDiagPlusLowRank& H) : H_(H)
{
    const Index n = H_.size();
    if (H_.factor.rows() != n && H_.factor.cols() > 0)
        throw InputError("structured factorization: low-rank factor has wrong row count");
    if (static_cast<Index>(H_.signs.size()) != H_.factor.cols())
        throw InputError("structured factorization: one sign per dyad required");

    inv_blocks_.reserve(H_.blocks.size());
    for (const auto& b : H_.blocks) {
        if (b.scalar) {
            if (!(std::abs(b.a) > 0.0) || !std::isfinite(b.a))
                throw NumericalError("structured factorization: singular scalar block in D");
            inv_blocks_.push_back({1.0 / b.a, 0.0, 0.0, true});
        } else {
            // closed-form adjugate inverse
            const double det = b.a * b.c - b.b * b.b;
            const double scale = std::abs(b.a * b.c) + b.b * b.b;
            if (!(std::abs(det) > 1e-14 * scale) || !std::isfinite(det))
                throw NumericalError("structured factorization: singular 2x2 block in D");
            inv_blocks_.push_back({b.c / det, -b.b / det, b.a / det, false});
        }
    }

    const Index j = H_.factor.cols();
    if (j == 0) return;

    dinv_u_ = apply_dinv(H_.factor);
    Matrix cap = H_.factor.transpose() * dinv_u_;
    use_llt_ = true;
    for (Index i = 0; i < j; ++i) {
        const double s = H_.signs[static_cast<std::size_t>(i)];
        cap(i, i) += s; // S^{-1} = S for s = +-1
        if (s < 0) use_llt_ = false;
    }
    if (use_llt_) {
        llt_.compute(cap);
        if (llt_.info() != Eigen::Success)
            throw NumericalError("structured factorization: capacitance matrix is not positive definite");
    } else {
        lu_.compute(cap);
        if (!lu_.isInvertible())
            throw NumericalError("structured factorization: capacitance matrix is singular");
    }
}

Matrix StructuredFactorization::apply_dinv(const Matrix& B) const
{
    Matrix out(B.rows(), B.cols());
    Index off = 0;
    for (const auto& b : inv_blocks_) {
        if (b.scalar) {
            out.row(off) = b.a * B.row(off);
            off += 1;
        } else {
            out.row(off) = b.a * B.row(off) + b.b * B.row(off + 1);
            out.row(off + 1) = b.b * B.row(off) + b.c * B.row(off + 1);
            off += 2;
        }
    }
    return out;
}

Matrix StructuredFactorization::woodbury(const Matrix& B) const
{
    Matrix y = apply_dinv(B);
    if (H_.factor.cols() == 0) return y;
    const Matrix t = H_.factor.transpose() * y;
    const Matrix z = use_llt_ ? Matrix(llt_.solve(t)) : Matrix(lu_.solve(t));
    y.noalias() -= dinv_u_ * z;
    return y;
}

Matrix StructuredFactorization::solve(const Matrix& B) const
{
    if (B.rows() != H_.size()) throw InputError("structured solve: right-hand side has wrong size");
    Matrix X = woodbury(B);
    for (Index col = 0; col < B.cols(); ++col) {
        const double bnorm = B.col(col).norm();
        for (int step = 0; step < 2; ++step) {
            const Vector r = B.col(col) - H_.apply(X.col(col));
            if (r.norm() <= 1e-13 * bnorm) break;
            X.col(col) += woodbury(r);
        }
    }
    return X;
}

Vector StructuredFactorization::solve(const Vector& b) const
{
    return solve(Matrix(b)).col(0);
}

Vector structured_solve(const BlockDiagPlusLowRank& H, const Vector& rhs)
{
    return StructuredFactorization(H).solve(rhs);
}

} // namespace sqsk
