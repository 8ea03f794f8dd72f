#pragma once

#include "sqsk/data.hpp"
#include "sqsk/numeric_kernels.hpp"
#include "sqsk/reduction.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sqsk {

struct SolverConfig
{
    double tol = 1e-8;      // outer stop: barrier_parameter / gamma < tol
    int max_newton = 1000;  // total Newton steps over all centering passes
    double mu = 10.0;       // gamma multiplier between centering passes
    std::uint64_t seed = 0; // only used by randomized helpers (reference solver, drivers)
    bool screen = true;     // drop features that the norm test proves inactive
};

enum class SolveStatus
{
    converged,
    max_iter,
    numerical,
};

std::string to_string(SolveStatus s);

struct Solution
{
    Vector w;
    double objective = 0.0;
    std::vector<Index> support; // |w_i| > support_tol(w)
    int iterations = 0;
    double gap = 0.0;           // primal objective minus a certified lower bound, >= 0
    SolveStatus status = SolveStatus::converged;
};

/// min_w ||A w - b||_2 + eps ||w||_2 + lam ||w||_1 with A of size rows x n.
struct GeneralizedInstance
{
    Matrix A;
    Vector b;
    double eps = 0.0;
    double lam = 0.0;

    Index n() const { return A.cols(); }
    double objective(const Vector& w) const;
    /// Throws InputError on shape mismatch, negative parameters or non-finite data.
    void validate() const;
};

/// A = [R^T; 0], b = (c, s).
GeneralizedInstance to_instance(const ReducedProblem& rp, double eps, double lam);

/// 1e-6 * max(1, ||w||_inf).
double support_tol(const Vector& w);
std::vector<Index> support_of(const Vector& w);

/// Lower bound on the optimal value from the dual point along the residual
/// direction (b - A w) / ||b - A w||, shrunk until it is dual feasible.
double general_dual_bound(const GeneralizedInstance& inst, const Vector& w);

enum class NewtonStrategy
{
    structured, // Woodbury on the block-diagonal plus dyads form; cost O(n j^2), j = rows(A) + 2
    dense,      // condensed n x n system, assembled each step; cost O(rows(A) n^2 + n^3)
};

/// One accepted Newton step of the barrier method.
struct NewtonRecord
{
    double gamma = 0.0;
    double phi_before = 0.0;
    double phi_after = 0.0;
    double decrement = 0.0; // lambda^2 / 2
    double step = 0.0;
};

struct SolveTrace
{
    std::vector<NewtonRecord> steps;
};

/// Barrier method on a general instance.
Solution solve_instance(const GeneralizedInstance& inst, const SolverConfig& cfg,
                        NewtonStrategy strategy = NewtonStrategy::structured, SolveTrace* trace = nullptr);

/// Reduced robust problem; never touches the observation count.
Solution solve_reduced(const ReducedProblem& rp, double eps, double lam, const SolverConfig& cfg,
                       SolveTrace* trace = nullptr);

/// Baseline: min ||X^T w - y||_2 + lam ||w||_1 on the full data.
Solution solve_full(const DataMatrix& X, const Vector& y, double lam, const SolverConfig& cfg);

/// Slow, independent oracle: accelerated proximal gradient with backtracking
/// and adaptive restart. Meant for small n.
Solution reference_solve(const GeneralizedInstance& inst, int iters = 200000, std::uint64_t seed = 0);

} // namespace sqsk
