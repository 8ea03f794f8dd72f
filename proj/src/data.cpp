#include "sqsk/data.hpp"

#include "sqsk/errors.hpp"

#include <cmath>
#include <sstream>

namespace sqsk {

DataMatrix::DataMatrix(Matrix dense) : data_(std::move(dense)) {}

DataMatrix::DataMatrix(SparseMatrix sparse) : data_(std::move(sparse))
{
    std::get<SparseMatrix>(data_).makeCompressed();
}

Index DataMatrix::rows() const
{
    return std::visit([](const auto& X) { return static_cast<Index>(X.rows()); }, data_);
}

Index DataMatrix::cols() const
{
    return std::visit([](const auto& X) { return static_cast<Index>(X.cols()); }, data_);
}

Matrix DataMatrix::times(const Matrix& M) const
{
    return std::visit([&](const auto& X) -> Matrix { return X * M; }, data_);
}

Matrix DataMatrix::transpose_times(const Matrix& M) const
{
    return std::visit([&](const auto& X) -> Matrix { return X.transpose() * M; }, data_);
}

Vector DataMatrix::times(const Vector& v) const
{
    return std::visit([&](const auto& X) -> Vector { return X * v; }, data_);
}

Vector DataMatrix::transpose_times(const Vector& v) const
{
    return std::visit([&](const auto& X) -> Vector { return X.transpose() * v; }, data_);
}

Vector DataMatrix::row(Index i) const
{
    if (i < 0 || i >= rows()) throw InputError("feature index out of range");
    return std::visit([&](const auto& X) -> Vector { return X.row(i).transpose(); }, data_);
}

Matrix DataMatrix::dense() const
{
    return std::visit([](const auto& X) -> Matrix { return Matrix(X); }, data_);
}

Matrix DataMatrix::dense_columns(Index start, Index count) const
{
    if (start < 0 || count < 0 || start + count > cols()) throw InputError("column block out of range");
    if (const Matrix* X = dense_ptr()) return X->middleCols(start, count);
    const SparseMatrix& X = *sparse_ptr();
    Matrix out = Matrix::Zero(X.rows(), count);
    for (Index r = 0; r < X.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(X, r); it; ++it)
            if (it.col() >= start && it.col() < start + count) out(r, it.col() - start) = it.value();
    return out;
}

double DataMatrix::squared_norm() const
{
    return std::visit([](const auto& X) { return X.squaredNorm(); }, data_);
}

DataMatrix DataMatrix::select_columns(std::span<const Index> cols) const
{
    for (Index c : cols)
        if (c < 0 || c >= this->cols()) throw InputError("observation index out of range");

    if (const Matrix* X = dense_ptr()) {
        Matrix out(X->rows(), static_cast<Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = X->col(cols[j]);
        return out;
    }
    const SparseMatrix& X = *sparse_ptr();
    std::vector<Index> where(static_cast<std::size_t>(X.cols()), -1);
    for (std::size_t j = 0; j < cols.size(); ++j) where[static_cast<std::size_t>(cols[j])] = static_cast<Index>(j);
    std::vector<Eigen::Triplet<double, std::int64_t>> trips;
    for (Index r = 0; r < X.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(X, r); it; ++it) {
            const Index dst = where[static_cast<std::size_t>(it.col())];
            if (dst >= 0) trips.emplace_back(r, dst, it.value());
        }
    SparseMatrix out(X.rows(), static_cast<Index>(cols.size()));
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

DataMatrix DataMatrix::drop_row(Index i) const
{
    if (i < 0 || i >= rows()) throw InputError("feature index out of range");
    if (const Matrix* X = dense_ptr()) {
        Matrix out(X->rows() - 1, X->cols());
        out.topRows(i) = X->topRows(i);
        out.bottomRows(X->rows() - i - 1) = X->bottomRows(X->rows() - i - 1);
        return out;
    }
    const SparseMatrix& X = *sparse_ptr();
    std::vector<Eigen::Triplet<double, std::int64_t>> trips;
    for (Index r = 0; r < X.outerSize(); ++r) {
        if (r == i) continue;
        for (SparseMatrix::InnerIterator it(X, r); it; ++it)
            trips.emplace_back(r < i ? r : r - 1, it.col(), it.value());
    }
    SparseMatrix out(X.rows() - 1, X.cols());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

void Dataset::validate() const
{
    if (y.size() != X.cols()) {
        std::ostringstream os;
        os << "response has length " << y.size() << " but X has " << X.cols() << " observations";
        throw InputError(os.str());
    }
    if (!y.allFinite()) throw InputError("response contains NaN or Inf");
    if (const Matrix* D = X.dense_ptr()) {
        if (!D->allFinite()) throw InputError("data matrix contains NaN or Inf");
    } else {
        const SparseMatrix& S = *X.sparse_ptr();
        for (Index k = 0; k < S.nonZeros(); ++k)
            if (!std::isfinite(S.valuePtr()[k])) throw InputError("data matrix contains NaN or Inf");
    }
    if (!feature_names.empty() && static_cast<Index>(feature_names.size()) != X.rows())
        throw InputError("feature name count does not match feature count");
}

bool Dataset::has_binary_labels() const
{
    for (Index i = 0; i < y.size(); ++i)
        if (y(i) != 1.0 && y(i) != -1.0) return false;
    return y.size() > 0;
}

} // namespace sqsk
