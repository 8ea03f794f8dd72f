#pragma once

#include "sqsk/data.hpp"
#include "sqsk/numeric_kernels.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace sqsk {

struct SketchMeta
{
    std::uint64_t power_iters = 0;
    std::uint64_t seed = 0;
    double spectral_error = 0.0; // estimate of sigma_{k+1}(X) from the oversampled range
};

enum class SketchSide
{
    observations, // rows of Q
    features,     // rows of P
};

/**
 * Low-rank factorization X ~ P Q^T with P (n x k) and Q (m x k).
 *
 * A Sketch is an immutable view: the factors are shared, and drop_rows only
 * narrows the lists of live rows. Canonical sketches from power_sketch have
 * orthonormal Q; views with dropped observations do not.
 */
class Sketch
{
public:
    Sketch() = default;
    Sketch(Matrix P, Matrix Q, SketchMeta meta = {});

    Index n() const { return static_cast<Index>(p_rows_.size()); }
    Index m() const { return static_cast<Index>(q_rows_.size()); }
    Index rank() const { return p_ ? p_->cols() : 0; }
    const SketchMeta& meta() const { return meta_; }

    /// Live rows of the underlying factors, strictly increasing.
    const std::vector<Index>& feature_rows() const { return p_rows_; }
    const std::vector<Index>& observation_rows() const { return q_rows_; }
    bool is_view() const;

    Matrix P() const;
    Matrix Q() const;
    auto p_row(Index i) const { return p_->row(p_rows_[static_cast<std::size_t>(i)]); }
    auto q_row(Index i) const { return q_->row(q_rows_[static_cast<std::size_t>(i)]); }

    /// K = Q^T Q over the live rows, O(m k^2).
    Matrix gram() const;
    /// Q^T y over the live rows; y has length m().
    Vector qt_times(const Vector& y) const;
    /// P Q^T (n x m), dense; for tests and small problems.
    Matrix reconstruct() const;

    /// View without the given rows (indices relative to this view, strictly increasing).
    Sketch drop_rows(std::span<const Index> indices, SketchSide side) const;

    /// Storage shared with another sketch (same underlying factors).
    bool shares_storage_with(const Sketch& other) const { return p_ == other.p_ && q_ == other.q_; }

private:
    std::shared_ptr<const Matrix> p_;
    std::shared_ptr<const Matrix> q_;
    std::vector<Index> p_rows_;
    std::vector<Index> q_rows_;
    SketchMeta meta_;
};

/// Randomized subspace iteration with a Gaussian test matrix, 5 columns of
/// oversampling and re-orthonormalization on every pass. Returns P = U_k S_k,
/// Q = V_k. Deterministic for a given seed.
Sketch power_sketch(const DataMatrix& X, Index k, int power_iters = 4, std::uint64_t seed = 0);

struct SketchError
{
    double spectral_estimate = 0.0;
    double frobenius_exact = 0.0;
};

/// ||X - P Q^T|| in both norms: Frobenius computed exactly in column blocks, spectral
/// norm estimated by block power iteration with `probes` passes.
SketchError sketch_error(const DataMatrix& X, const Sketch& sk, int probes = 20, std::uint64_t seed = 0);

} // namespace sqsk
