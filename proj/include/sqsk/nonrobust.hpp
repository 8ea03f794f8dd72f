#pragma once

#include "sqsk/data.hpp"
#include "sqsk/sketch.hpp"
#include "sqsk/solver.hpp"

#include <vector>

namespace sqsk {

/// min_w ||Q P^T w - y||_2 + lam ||w||_1, i.e. the reduced problem with eps = 0.
Solution solve_nonrobust(const Sketch& sk, const Vector& y, double lam, const SolverConfig& cfg);

struct CardinalityStep
{
    Index pivot = 0; // component driven toward zero by construction
    Vector theta;    // direction, A theta = 0, theta_pivot = -sign(x_pivot)
    double rho = 0.0;
};

struct CardinalityTrace
{
    std::vector<CardinalityStep> steps;
    Vector x;
};

/**
 * Moves x along null-space directions of the active columns of A until at most
 * rows(A) components are nonzero, keeping A x and ||x||_1 fixed.
 *
 * Each direction also annihilates the sign vector of the active set when that
 * is possible, which keeps ||x||_1 exact even for inexact minimizers; for an
 * exact l1 minimizer this is the usual basis-pursuit reduction.
 * Components with |x_j| <= 1e-12 ||x||_inf are treated as zero.
 * Throws InputError on shape mismatch or when A x differs from b by more than tol.
 */
CardinalityTrace cardinality_reduce(const Matrix& A, const Vector& b, const Vector& x, double tol = 1e-8);

/// Number of components with |x_j| > 1e-12 ||x||_inf.
Index cardinality(const Vector& x);

enum class ProfileMode
{
    robust,
    nonrobust,
};

struct ProfilePoint
{
    double lam = 0.0;
    Index cardinality = 0; // |support| after any cardinality reduction
    double objective = 0.0;
    Vector w;
};

struct SparsityProfile
{
    ProfileMode mode = ProfileMode::robust;
    Index rank = 0;
    double eps = 0.0;
    std::vector<ProfilePoint> points;
};

/// Sketches the data once at rank k and solves along an increasing lambda grid.
/// In nonrobust mode eps is ignored and every solution is passed through
/// cardinality_reduce with A = R^T.
SparsityProfile sparsity_profile(ProfileMode mode, const Dataset& data, Index k, double eps,
                                 const std::vector<double>& lambdas, const SolverConfig& cfg);

} // namespace sqsk
