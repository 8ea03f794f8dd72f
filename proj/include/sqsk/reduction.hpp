#pragma once

#include "sqsk/numeric_kernels.hpp"
#include "sqsk/sketch.hpp"

#include <optional>
#include <vector>

namespace sqsk {

/**
 * The reduced robust problem
 *
 *     min_w || (c - R^T w, s) ||_2 + eps ||w||_2 + lam ||w||_1
 *
 * obtained from a sketch X ~ P Q^T and a response y via K = Q^T Q,
 * c = K^{-1/2} Q^T y, s = sqrt(y^T y - c^T c), R = P K^{1/2}.
 * Only (R, c, s) are kept: nothing here scales with the number of observations.
 */
struct ReducedProblem
{
    Matrix R;       // n x k
    Vector c;       // k
    double s = 0.0; // >= 0
    /// Original feature ids of the rows of R, set after screening/restriction.
    std::optional<std::vector<Index>> kept;
    /// K was numerically rank deficient and the pseudo-inverse path was used.
    bool rank_deficient = false;

    Index n_features() const { return R.rows(); }
    Index rank() const { return R.cols(); }
    /// ||(c, s)||_2, the objective at w = 0.
    double response_norm() const;
    /// Objective of the reduced problem at w.
    double objective(const Vector& w, double eps, double lam) const;
};

/// Reduction from a sketch and a response of length sk.m().
/// Throws InputError for y = 0 or mismatched length.
ReducedProblem reduce(const Sketch& sk, const Vector& y, double rank_tol = 1e-12);

/// Same reduction from precomputed moments: P (n x k), K = Q^T Q, Q^T y and y^T y.
/// Used by drivers that update K and Q^T y incrementally.
ReducedProblem reduce_from_moments(const Matrix& P, const Matrix& K, const Vector& qty, double yty,
                                   double rank_tol = 1e-12);

/// Safe feature elimination: keeps feature i iff ||R_i||_2 > lam - eps.
/// Every feature is kept when lam <= eps.
std::vector<Index> screen(const ReducedProblem& rp, double eps, double lam);

/// Sub-problem on the listed rows of R; `kept` records the original ids.
ReducedProblem restrict_features(const ReducedProblem& rp, const std::vector<Index>& rows);

/// Rank-one worst-case perturbation Delta = eps * feature_dir * observation_dir^T
/// of the data matrix (n x m) for a fixed w.
struct PerturbationWitness
{
    double eps = 0.0;
    Vector feature_dir;     // n, unit norm
    Vector observation_dir; // m, unit norm
    double attained_value = 0.0; // ||(Xhat + Delta)^T w - y||_2

    Matrix dense() const { return eps * feature_dir * observation_dir.transpose(); }
};

PerturbationWitness worst_case_perturbation(const Matrix& Xhat, const Vector& w, const Vector& y, double eps);

/// Dual point (u, t, v, r) of the reduced problem.
struct DualPoint
{
    Vector u;
    double t = 0.0;
    Vector v;
    Vector r;
    bool feasible = false;
    double value = 0.0;
};

struct FeasibilityCheck
{
    bool feasible = false;
    Vector v; // clip(R u, [-lam, lam])
    Vector r; // R u - v, the minimum-norm choice
};

/// Exact test of whether R u = v + r admits ||v||_inf <= lam, ||r||_2 <= eps.
FeasibilityCheck dual_feasible(const Vector& u, const ReducedProblem& rp, double eps, double lam);

/// u^T c + s sqrt(1 - u^T u); throws InputError when ||u||_2 > 1.
double dual_value(const Vector& u, const ReducedProblem& rp);

/**
 * Dual certificate for a primal point w: u follows the residual direction
 * (c - R^T w, s) / ||.||, scaled back toward 0 until dual_feasible holds.
 * The returned value lower-bounds the optimal objective.
 */
DualPoint dual_certificate(const ReducedProblem& rp, const Vector& w, double eps, double lam);

/// Closed form of min_z ||Q z - y||_2 + u^T z; nullopt when it is unbounded below.
std::optional<double> f1_closed_form(const Vector& u, const Matrix& Q, const Vector& y, double rank_tol = 1e-12);

} // namespace sqsk
