#pragma once

#include <Eigen/Dense>

#include <vector>

namespace sqsk {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigen-pairs of a symmetric matrix, eigenvalues sorted in descending order.
struct SymEig
{
    Vector values;
    Matrix vectors; // columns are orthonormal eigenvectors
};

/// Symmetric eigendecomposition S = V diag(values) V^T.
/// Throws InputError when S is not square or not symmetric to 1e-10 * ||S||.
SymEig sym_eig(const Matrix& S);

/// K^{1/2} and the pseudo-inverse square root K^{+1/2} of a symmetric PSD matrix.
struct PsdRoots
{
    Matrix half;
    Matrix inv_half;
    Index rank = 0;     // eigenvalues above rank_tol * lambda_max
    bool rank_deficient() const { return rank < half.rows(); }
};

/// Eigenvalues below rank_tol * lambda_max are treated as zero. Eigenvalues below
/// -rank_tol * lambda_max mean K is not a Gram matrix and raise NumericalError.
PsdRoots psd_sqrt_invsqrt(const Matrix& K, double rank_tol = 1e-12);

/// One diagonal block of a block-diagonal matrix: either the scalar `a`
/// or the symmetric 2x2 block [[a, b], [b, c]].
struct DiagBlock
{
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    bool scalar = true;

    Index size() const { return scalar ? 1 : 2; }
};

/**
 * H = D + sum_j sign_j * u_j u_j^T where D is block diagonal with 1x1 and 2x2
 * blocks laid out contiguously in order, and u_j are the columns of `factor`.
 *
 * This is the shape of the log-barrier Hessian of the square-root LASSO: the
 * p/q split gives 2x2 blocks, the cone constraints contribute a handful of dyads.
 */
struct BlockDiagPlusLowRank
{
    std::vector<DiagBlock> blocks;
    Matrix factor;              // size() x j
    std::vector<double> signs;  // j entries, each +1 or -1

    void add_scalar(double a) { blocks.push_back({a, 0.0, 0.0, true}); }
    void add_block(double a, double b, double c) { blocks.push_back({a, b, c, false}); }

    Index size() const;
    Index rank() const { return factor.cols(); }

    /// H x without forming H.
    Vector apply(const Vector& x) const;
    /// Dense H; for tests and small problems only.
    Matrix dense() const;
};

/**
 * Woodbury factorization of a BlockDiagPlusLowRank matrix.
 *
 * Factoring costs O(N j^2 + j^3) and each solve O(N j), where N is the matrix
 * size and j the number of dyads; the N x N matrix is never formed.
 * Throws NumericalError when D or the j x j capacitance matrix is singular.
 */
class StructuredFactorization
{
public:
    explicit StructuredFactorization(const BlockDiagPlusLowRank& H);

    /// Solves H X = B column by column, with up to two steps of iterative refinement.
    Matrix solve(const Matrix& B) const;
    Vector solve(const Vector& b) const;

private:
    Matrix apply_dinv(const Matrix& B) const;
    Matrix woodbury(const Matrix& B) const;

    BlockDiagPlusLowRank H_;
    std::vector<DiagBlock> inv_blocks_;
    Matrix dinv_u_;                 // D^{-1} U
    Eigen::LLT<Matrix> llt_;        // capacitance, all signs positive
    Eigen::FullPivLU<Matrix> lu_;   // capacitance, mixed signs
    bool use_llt_ = true;
};

/// Solves H x = rhs for a structured H (see StructuredFactorization).
Vector structured_solve(const BlockDiagPlusLowRank& H, const Vector& rhs);

/// max(|x_i|), 0 for empty vectors.
inline double inf_norm(const Vector& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; }

} // namespace sqsk
