#pragma once

#include "sqsk/numeric_kernels.hpp"

#include <Eigen/Sparse>

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sqsk {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;

/**
 * Data matrix X with features as rows and observations as columns (n x m),
 * stored either dense or as CSR. Only the products the algorithms need are
 * exposed, so callers never branch on the storage kind.
 */
class DataMatrix
{
public:
    DataMatrix() = default;
    DataMatrix(Matrix dense);        // NOLINT(google-explicit-constructor)
    DataMatrix(SparseMatrix sparse); // NOLINT(google-explicit-constructor)

    Index rows() const;
    Index cols() const;
    bool is_sparse() const { return std::holds_alternative<SparseMatrix>(data_); }

    Matrix times(const Matrix& M) const;            // X M
    Matrix transpose_times(const Matrix& M) const;  // X^T M
    Vector times(const Vector& v) const;
    Vector transpose_times(const Vector& v) const;

    Vector row(Index i) const;
    Matrix dense() const;
    /// Dense copy of columns [start, start + count).
    Matrix dense_columns(Index start, Index count) const;
    double squared_norm() const;

    /// Keeps the listed observations (columns), in the given order.
    DataMatrix select_columns(std::span<const Index> cols) const;
    /// Drops one feature (row).
    DataMatrix drop_row(Index i) const;

    const Matrix* dense_ptr() const { return std::get_if<Matrix>(&data_); }
    const SparseMatrix* sparse_ptr() const { return std::get_if<SparseMatrix>(&data_); }

private:
    std::variant<Matrix, SparseMatrix> data_;
};

/// A learning problem: X (n features x m observations) and a response y of length m.
struct Dataset
{
    DataMatrix X;
    Vector y;
    std::vector<std::string> feature_names;

    Index n_features() const { return X.rows(); }
    Index n_observations() const { return X.cols(); }

    /// Throws InputError on shape mismatch or non-finite values.
    void validate() const;
    /// True when every label is exactly +1 or -1.
    bool has_binary_labels() const;
};

} // namespace sqsk
