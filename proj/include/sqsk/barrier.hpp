#pragma once

#include "sqsk/numeric_kernels.hpp"

namespace sqsk {

/**
 * Newton system of the log barrier, H = [[H_xx, B], [B^T, H_ss]], where x
 * holds the weight variables (interleaved p_i, q_i pairs, or w directly when
 * lam = 0) and the trailing block holds the slacks (sigma[, tau]).
 *
 * In terms of the lifting L: w -> x (w_i -> (w_i, -w_i), identity when not split),
 *
 *     H_xx = diag(x_diag) + L (cone I + data_scale A^T A + Y Y^T) L^T,
 *
 * i.e. n 2x2 blocks plus a (rows + 2)-dyad. Nothing n x n is stored.
 */
struct NewtonSystem
{
    bool split = true;
    Index n = 0;
    Vector x_diag;      // from -log p_i, -log q_i (zero when not split)
    double cone = 0.0;  // 2 / (tau^2 - ||w||^2), 0 without the eps term
    double data_scale = 0.0; // 2 / (sigma^2 - ||A w - b||^2)
    const Matrix* A = nullptr;
    Matrix w_dyads;     // n x d, gradient dyads of the two cone terms
    Matrix w_border;    // n x n_slack, coupling of w with (sigma[, tau])
    Matrix hss;         // n_slack x n_slack
    // hss = diag(s_diag) + diag(s_dyads)^2 and w_border = w_dyads diag(s_dyads),
    // i.e. the slack rows of the cone dyads and what is left on the diagonal.
    Vector s_dyads;
    Vector s_diag;
    // Point the system was formed at, for solvers that eliminate the slacks in closed form.
    Vector w;
    Vector residual; // A w - b
    double sigma = 0.0;
    double tau = 0.0; // unused without the eps term

    Index nx() const { return split ? 2 * n : n; }
    Index size() const { return nx() + hss.rows(); }

    Matrix lift(const Matrix& W) const;
    Matrix lift_transpose(const Matrix& X) const;

    /// H v without forming H.
    Vector apply(const Vector& v) const;
    /// H_xx as block diagonal plus positive dyads (zero rows of A skipped).
    BlockDiagPlusLowRank xx_structured() const;
    /// Dense H, for tests.
    Matrix dense() const;
};

/**
 * Log barrier of
 *
 *     min  sigma + eps tau + lam 1^T (p + q)
 *     s.t. ||p - q||_2 <= tau, ||A (p - q) - b||_2 <= sigma, p, q >= 0
 *
 *     phi_gamma = gamma (sigma + eps tau + lam 1^T (p + q))
 *                 - log(tau^2 - ||w||^2) - log(sigma^2 - ||A w - b||^2)
 *                 - sum log p - sum log q - log sigma - log tau,   w = p - q.
 *
 * When eps = 0 the tau variable and its terms are dropped; when lam = 0 the
 * split is dropped and w is a free variable. State vectors are laid out as
 * [x, sigma, tau].
 */
class BarrierModel
{
public:
    BarrierModel(const Matrix& A, const Vector& b, double eps, double lam);

    Index n() const { return A_.cols(); }
    bool split() const { return split_; }
    bool has_tau() const { return has_tau_; }
    Index nx() const { return split_ ? 2 * n() : n(); }
    Index size() const { return nx() + (has_tau_ ? 2 : 1); }
    Index sigma_index() const { return nx(); }
    Index tau_index() const { return nx() + 1; }

    /// Self-concordance parameter: 2 per cone, 1 per scalar log term.
    double barrier_parameter() const;

    /// p = q = 1, sigma = 1.5 ||b|| + 1, tau = 3 sqrt(n).
    Vector initial_point() const;
    Vector weights(const Vector& z) const;
    bool interior(const Vector& z) const;

    /// +inf outside the strict interior.
    double value(const Vector& z, double gamma) const;
    Vector gradient(const Vector& z, double gamma) const;
    NewtonSystem hessian(const Vector& z) const;

    /**
     * Newton direction -H^{-1} g for the split form (lam > 0), computed by
     * Woodbury against the diagonal log terms with the inverse cone Hessians
     * (sigma, r) -> -(D/2) J + x x^T in the capacitance. Those inverses stay
     * well scaled as the iterates approach the cone boundary, whereas H itself
     * has entries of order gamma^2. Cost O(n rows(A)^2 + rows(A)^3).
     */
    Vector split_newton_direction(const Vector& z, const Vector& g) const;

    /**
     * Minimizes phi exactly over sigma (and tau) with the weights held fixed,
     * when the current slack lies below that minimizer. A slack pinned near its
     * cone boundary otherwise takes one Newton step per doubling to recover.
     */
    void center_slacks(Vector& z, double gamma) const;

    /// Supremum of alpha >= 0 with z + alpha dz strictly interior (may be +inf).
    double max_step(const Vector& z, const Vector& dz) const;

private:
    const Matrix& A_;
    const Vector& b_;
    double eps_;
    double lam_;
    bool split_;
    bool has_tau_;
};

} // namespace sqsk
