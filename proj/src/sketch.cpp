#include "sqsk/sketch.hpp"

#include "sqsk/errors.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

namespace sqsk {

namespace {

constexpr Index kOversample = 5;

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    Matrix G(rows, cols);
    // column-major fill order fixes the stream layout
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) G(i, j) = nd(rng);
    return G;
}

Matrix orthonormalize(const Matrix& A)
{
    Eigen::HouseholderQR<Matrix> qr(A);
    return qr.householderQ() * Matrix::Identity(A.rows(), A.cols());
}

std::vector<Index> iota_rows(Index n)
{
    std::vector<Index> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), Index{0});
    return v;
}

} // namespace

Sketch::Sketch(Matrix P, Matrix Q, SketchMeta meta)
    : p_(std::make_shared<const Matrix>(std::move(P))),
      q_(std::make_shared<const Matrix>(std::move(Q))),
      meta_(meta)
{
    if (p_->cols() != q_->cols()) {
        std::ostringstream os;
        os << "sketch factors disagree on rank: P has " << p_->cols() << " columns, Q has " << q_->cols();
        throw InputError(os.str());
    }
    p_rows_ = iota_rows(p_->rows());
    q_rows_ = iota_rows(q_->rows());
}

bool Sketch::is_view() const
{
    return p_ && (n() != p_->rows() || m() != q_->rows());
}

Matrix Sketch::P() const
{
    Matrix out(n(), rank());
    for (Index i = 0; i < n(); ++i) out.row(i) = p_row(i);
    return out;
}

Matrix Sketch::Q() const
{
    Matrix out(m(), rank());
    for (Index i = 0; i < m(); ++i) out.row(i) = q_row(i);
    return out;
}

Matrix Sketch::gram() const
{
    const Index k = rank();
    if (!is_view()) return q_->transpose() * *q_;
    Matrix K = Matrix::Zero(k, k);
    for (Index i = 0; i < m(); ++i) K.selfadjointView<Eigen::Lower>().rankUpdate(q_row(i).transpose());
    return K.selfadjointView<Eigen::Lower>();
}

Vector Sketch::qt_times(const Vector& y) const
{
    if (y.size() != m()) throw InputError("qt_times: vector length does not match observation count");
    if (m() == q_->rows()) return q_->transpose() * y;
    Vector out = Vector::Zero(rank());
    for (Index i = 0; i < m(); ++i) out += y(i) * q_row(i).transpose();
    return out;
}

Matrix Sketch::reconstruct() const
{
    return P() * Q().transpose();
}

Sketch Sketch::drop_rows(std::span<const Index> indices, SketchSide side) const
{
    const std::vector<Index>& live = side == SketchSide::observations ? q_rows_ : p_rows_;
    const Index count = static_cast<Index>(live.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] < 0 || indices[i] >= count) throw InputError("drop_rows: index out of range");
        if (i > 0 && indices[i] <= indices[i - 1])
            throw InputError(indices[i] == indices[i - 1] ? "drop_rows: duplicate index"
                                                          : "drop_rows: indices must be strictly increasing");
    }
    if (static_cast<Index>(indices.size()) == count) throw InputError("drop_rows: cannot drop every row");

    std::vector<Index> kept;
    kept.reserve(live.size() - indices.size());
    std::size_t d = 0;
    for (Index i = 0; i < count; ++i) {
        if (d < indices.size() && indices[d] == i) {
            ++d;
            continue;
        }
        kept.push_back(live[static_cast<std::size_t>(i)]);
    }

    Sketch out = *this;
    (side == SketchSide::observations ? out.q_rows_ : out.p_rows_) = std::move(kept);
    return out;
}

Sketch power_sketch(const DataMatrix& X, Index k, int power_iters, std::uint64_t seed)
{
    const Index n = X.rows();
    const Index m = X.cols();
    if (k < 1 || k > std::min(n, m)) {
        std::ostringstream os;
        os << "power_sketch: rank " << k << " outside [1, min(n, m)] = [1, " << std::min(n, m) << "]";
        throw InputError(os.str());
    }
    if (power_iters < 0) throw InputError("power_sketch: power_iters must be nonnegative");

    const Index l = std::min(k + kOversample, std::min(n, m));
    std::mt19937_64 rng(seed);
    const Matrix omega = gaussian(n, l, rng);

    // Z spans the dominant right singular subspace (observation space).
    Matrix Z = orthonormalize(X.transpose_times(omega));
    for (int it = 0; it < power_iters; ++it) {
        const Matrix Y = orthonormalize(X.times(Z));
        Z = orthonormalize(X.transpose_times(Y));
    }

    // X ~ X Z Z^T = (U S W^T) Z^T
    const Matrix B = X.times(Z);
    Eigen::JacobiSVD<Matrix> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();

    Matrix P = svd.matrixU().leftCols(k) * sv.head(k).asDiagonal();
    Matrix Q = Z * svd.matrixV().leftCols(k);

    SketchMeta meta;
    meta.power_iters = static_cast<std::uint64_t>(power_iters);
    meta.seed = seed;
    meta.spectral_error = l > k ? sv(k) : 0.0;
    return Sketch(std::move(P), std::move(Q), meta);
}

SketchError sketch_error(const DataMatrix& X, const Sketch& sk, int probes, std::uint64_t seed)
{
    if (X.rows() != sk.n() || X.cols() != sk.m()) {
        std::ostringstream os;
        os << "sketch_error: data is " << X.rows() << "x" << X.cols() << " but sketch is " << sk.n() << "x" << sk.m();
        throw InputError(os.str());
    }
    const Matrix P = sk.P();
    const Matrix Q = sk.Q();
    const Index n = X.rows();
    const Index m = X.cols();

    SketchError out;

    // Frobenius norm of the residual, column block by column block.
    constexpr Index kBlock = 256;
    double fro2 = 0.0;
    for (Index c0 = 0; c0 < m; c0 += kBlock) {
        const Index w = std::min(kBlock, m - c0);
        Matrix R = X.dense_columns(c0, w);
        R.noalias() -= P * Q.middleRows(c0, w).transpose();
        fro2 += R.squaredNorm();
    }
    out.frobenius_exact = std::sqrt(fro2);

    if (n == 0 || m == 0 || probes <= 0) return out;

    // Block power iteration on E = X - P Q^T.
    const Index b = std::min<Index>(4, std::min(n, m));
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    Matrix V = orthonormalize(gaussian(m, b, rng));
    auto apply = [&](const Matrix& M) -> Matrix {
        Matrix r = X.times(M);
        r.noalias() -= P * (Q.transpose() * M);
        return r;
    };
    auto apply_t = [&](const Matrix& M) -> Matrix {
        Matrix r = X.transpose_times(M);
        r.noalias() -= Q * (P.transpose() * M);
        return r;
    };
    for (int it = 0; it < probes; ++it) {
        const Matrix U = orthonormalize(apply(V));
        V = orthonormalize(apply_t(U));
    }
    const Matrix EV = apply(V);
    Eigen::JacobiSVD<Matrix> svd(EV);
    out.spectral_estimate = svd.singularValues()(0);
    return out;
}

} // namespace sqsk
