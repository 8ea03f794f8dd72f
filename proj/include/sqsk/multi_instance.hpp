#pragma once

#include "sqsk/data.hpp"
#include "sqsk/sketch.hpp"
#include "sqsk/solver.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace sqsk {

/// Seeded shuffle of 0..m-1 split into `folds` groups whose sizes differ by at most one.
/// Each group is sorted. Throws InputError unless 2 <= folds <= m.
std::vector<std::vector<Index>> make_folds(Index m, Index folds, std::uint64_t seed);

/// F1 score of sign(scores) (0 counts as +1) against +-1 labels, positive class +1.
double f1_score(const Vector& scores, const Vector& labels);

struct CVRecord
{
    Index fold = 0;
    double lam = 0.0;
    double objective = 0.0;
    double validation_loss = 0.0; // ||X_val^T w - y_val||_2 on the original data
    std::optional<double> f1;     // only for +-1 labels
    Index cardinality = 0;
    double solve_seconds = 0.0;
    SolveStatus status = SolveStatus::converged;
};

struct CVReport
{
    bool sketched = true;
    Index rank = 0; // 0 for the full model
    double eps = 0.0;
    std::vector<double> lambdas;
    std::vector<std::vector<Index>> folds;
    std::vector<CVRecord> records; // fold-major, lambda-minor

    double sketch_seconds = 0.0;
    double reduce_seconds = 0.0; // per-fold K, Q^T y and reduction work, summed
    double solve_seconds = 0.0;  // all instance solves, summed
    double total_seconds = 0.0;  // wall time of the whole run, sketch phase included

    /// Mean validation loss over folds, one entry per lambda.
    std::vector<double> mean_validation_loss() const;
    /// Mean F1 over folds per lambda; empty when labels are not +-1.
    std::vector<double> mean_f1() const;
    bool all_converged() const;
};

/**
 * K-fold cross-validation on one sketch. For every fold the held-out rows of Q
 * are removed, the moments K = Q^T Q and Q^T y are rebuilt (from scratch when
 * the fold holds more than 10% of the observations, otherwise by downdating),
 * and each lambda is solved on the reduced problem.
 */
CVReport cross_validate(const Dataset& data, Index k, Index folds, const std::vector<double>& lambdas, double eps,
                        const SolverConfig& cfg);

/// Same protocol with solve_full on the raw training columns.
CVReport cross_validate_full(const Dataset& data, Index folds, const std::vector<double>& lambdas,
                             const SolverConfig& cfg);

/// Moments of the reduced problem with observation i removed, by rank-one downdate.
struct DowndatedMoments
{
    Matrix K;
    Vector qty;
    double yty = 0.0;
};

DowndatedMoments downdate_moments(const Sketch& sk, const Matrix& K, const Vector& qty, double yty,
                                  const Vector& y, Index i);

struct LOOReport
{
    Index rank = 0;
    double eps = 0.0;
    double lam = 0.0;
    std::vector<Solution> solutions; // solutions[i] omits observation i
    std::vector<Index> fallbacks;    // instances whose downdate was indefinite and were recomputed
    double sketch_seconds = 0.0;
    double solve_seconds = 0.0;
    double total_seconds = 0.0;
};

LOOReport leave_one_out(const Dataset& data, Index k, double eps, double lam, const SolverConfig& cfg);

/// Same, on a caller-supplied sketch of data.X (no sketch phase is timed).
LOOReport leave_one_out(const Dataset& data, const Sketch& sk, double eps, double lam, const SolverConfig& cfg);

struct TopicReport
{
    Index query = 0;
    std::vector<std::pair<Index, double>> ranking; // (feature id, |w|), descending, nonzero weights only
    double solve_seconds = 0.0;
    SolveStatus status = SolveStatus::converged;
};

/// Regresses feature j (its values across observations) on the remaining
/// features of the shared sketch and ranks them by |w|.
TopicReport topic_image(const Dataset& data, const Sketch& sk, Index query, double lam, double eps, Index top_t,
                        const SolverConfig& cfg);

/// Runs the queries on up to `threads` workers (0: SQSK_THREADS or the hardware
/// concurrency). Reports come back in query order and do not depend on `threads`.
std::vector<TopicReport> topic_image_batch(const Dataset& data, const Sketch& sk, const std::vector<Index>& queries,
                                           double lam, double eps, Index top_t, const SolverConfig& cfg,
                                           unsigned threads = 0);

/// Worker count from SQSK_THREADS, clamped to [1, hardware concurrency].
unsigned driver_threads();

} // namespace sqsk
