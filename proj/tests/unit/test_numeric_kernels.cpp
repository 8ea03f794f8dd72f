#include "sqsk/errors.hpp"
#include "sqsk/numeric_kernels.hpp"

#include "support/test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <limits>

using namespace sqsk;
using namespace sqsk::testing;

namespace {

Matrix random_symmetric(Index n, Rng& rng)
{
    const Matrix G = gauss(n, n, rng);
    return 0.5 * (G + G.transpose());
}

// Block-diagonal plus dyads with positive definite 2x2/1x1 blocks.
BlockDiagPlusLowRank random_structured(Index pairs, Index scalars, Index j, Rng& rng, bool mixed_signs = false)
{
    BlockDiagPlusLowRank H;
    for (Index i = 0; i < pairs; ++i) {
        const double a = uniform(1.0, 3.0, rng);
        const double c = uniform(1.0, 3.0, rng);
        const double b = uniform(-0.5, 0.5, rng) * std::sqrt(a * c);
        H.add_block(a, b, c);
    }
    for (Index i = 0; i < scalars; ++i) H.add_scalar(uniform(0.5, 2.0, rng));
    H.factor = gauss(H.size(), j, rng) / std::sqrt(static_cast<double>(H.size()));
    H.signs.assign(static_cast<std::size_t>(j), 1.0);
    if (mixed_signs && j > 0) {
        // Keep H positive definite: a small negative dyad.
        H.factor.col(0) *= 0.1;
        H.signs[0] = -1.0;
    }
    return H;
}

} // namespace

TEST(SymEig, IdentityAndDiagonal)
{
    const SymEig e = sym_eig(Matrix::Identity(2, 2));
    EXPECT_DOUBLE_EQ(e.values(0), 1.0);
    EXPECT_DOUBLE_EQ(e.values(1), 1.0);
    EXPECT_LE((e.vectors.transpose() * e.vectors - Matrix::Identity(2, 2)).norm(), 1e-12);

    Matrix D = Matrix::Zero(2, 2);
    D.diagonal() << 1.0, 4.0;
    const SymEig d = sym_eig(D);
    EXPECT_DOUBLE_EQ(d.values(0), 4.0);
    EXPECT_DOUBLE_EQ(d.values(1), 1.0);
    EXPECT_NEAR(std::abs(d.vectors(1, 0)), 1.0, 1e-12);
}

TEST(SymEig, RejectsNonSymmetric)
{
    Matrix S(2, 2);
    S << 1, 2, 0, 1;
    EXPECT_THROW(sym_eig(S), InputError);
    EXPECT_THROW(sym_eig(Matrix::Zero(2, 3)), InputError);
}

TEST(SymEig, ReconstructionProperty)
{
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = uniform_int(1, 30, rng);
        const Matrix S = random_symmetric(n, rng) * uniform(1e-3, 1e3, rng);
        const SymEig e = sym_eig(S);
        const Matrix V = e.vectors;
        EXPECT_LE((V * e.values.asDiagonal() * V.transpose() - S).norm(), 1e-8 * S.norm()) << "n=" << n;
        EXPECT_LE((S * V - V * e.values.asDiagonal()).norm(), 1e-8 * S.norm());
        EXPECT_LE((V.transpose() * V - Matrix::Identity(n, n)).norm(), 1e-10);
        for (Index i = 1; i < n; ++i) EXPECT_GE(e.values(i - 1), e.values(i));
    }
}

TEST(PsdRoots, ScalarAndIdentity)
{
    Matrix K(1, 1);
    K << 2.0;
    const PsdRoots r = psd_sqrt_invsqrt(K);
    EXPECT_NEAR(r.half(0, 0), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(r.inv_half(0, 0), 1.0 / std::sqrt(2.0), 1e-15);

    const PsdRoots id = psd_sqrt_invsqrt(Matrix::Identity(3, 3));
    EXPECT_LE((id.half - Matrix::Identity(3, 3)).norm(), 1e-14);
    EXPECT_LE((id.inv_half - Matrix::Identity(3, 3)).norm(), 1e-14);
    EXPECT_FALSE(id.rank_deficient());
}

TEST(PsdRoots, GramResidual)
{
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const Matrix Q = gauss(6, 3, rng);
        const Matrix K = Q.transpose() * Q;
        const PsdRoots r = psd_sqrt_invsqrt(K);
        EXPECT_LE((r.half * r.half - K).norm(), 1e-8 * K.norm());
        EXPECT_LE((r.inv_half * K * r.inv_half - Matrix::Identity(3, 3)).norm(), 1e-8);
    }
}

TEST(PsdRoots, RankDeficientUsesPseudoInverse)
{
    Rng rng(6);
    const Matrix Q = gauss(5, 2, rng) * gauss(2, 3, rng); // rank 2, 3 columns
    const Matrix K = Q.transpose() * Q;
    const PsdRoots r = psd_sqrt_invsqrt(K);
    EXPECT_TRUE(r.rank_deficient());
    EXPECT_EQ(r.rank, 2);
    // inv_half * K * inv_half is the projector onto range(K).
    const Matrix proj = r.inv_half * K * r.inv_half;
    EXPECT_LE((proj * proj - proj).norm(), 1e-8);
    EXPECT_NEAR(proj.trace(), 2.0, 1e-8);
}

TEST(PsdRoots, IndefiniteRejected)
{
    Matrix K = Matrix::Identity(2, 2);
    K(1, 1) = -0.5;
    EXPECT_THROW(psd_sqrt_invsqrt(K), NumericalError);
}

TEST(StructuredSolve, Identity)
{
    BlockDiagPlusLowRank H;
    H.add_scalar(1.0);
    H.add_scalar(1.0);
    H.factor = Matrix::Zero(2, 0);
    const Vector x = structured_solve(H, Vector::Unit(2, 0));
    EXPECT_LE((x - Vector::Unit(2, 0)).norm(), 1e-15);
}

TEST(StructuredSolve, ShermanMorrisonByHand)
{
    BlockDiagPlusLowRank H;
    H.add_scalar(1.0);
    H.add_scalar(1.0);
    H.factor = Matrix::Zero(2, 1);
    H.factor(0, 0) = 1.0;
    H.signs = {1.0};
    Vector rhs(2);
    rhs << 3.0, -1.5;
    const Vector x = structured_solve(H, rhs);
    EXPECT_NEAR(x(0), 1.5, 1e-15);
    EXPECT_NEAR(x(1), -1.5, 1e-15);
}

TEST(StructuredSolve, MatchesDenseOracle)
{
    Rng rng(7);
    const BlockDiagPlusLowRank H = random_structured(24, 2, 4, rng);
    ASSERT_EQ(H.size(), 50);
    const Vector rhs = gauss(50, rng);
    const Vector x = structured_solve(H, rhs);
    const Vector ref = H.dense().llt().solve(rhs);
    EXPECT_LE((x - ref).norm(), 1e-8 * ref.norm());
    EXPECT_LE((H.apply(x) - rhs).norm(), 1e-8 * rhs.norm());
}

TEST(StructuredSolve, WoodburyEquivalenceProperty)
{
    Rng rng(8);
    for (int trial = 0; trial < 40; ++trial) {
        const Index pairs = uniform_int(1, 95, rng);
        const Index scalars = uniform_int(0, 3, rng);
        const Index j = uniform_int(0, 8, rng);
        const BlockDiagPlusLowRank H = random_structured(pairs, scalars, j, rng, trial % 3 == 0);
        ASSERT_LE(H.size(), 200);
        const Vector rhs = gauss(H.size(), rng);
        const Vector x = structured_solve(H, rhs);
        const Vector ref = H.dense().partialPivLu().solve(rhs);
        EXPECT_LE((x - ref).norm(), 1e-8 * ref.norm()) << "trial " << trial;
    }
}

TEST(StructuredSolve, SingularBlockRejected)
{
    BlockDiagPlusLowRank H;
    H.add_block(1.0, 1.0, 1.0);
    H.factor = Matrix::Zero(2, 0);
    EXPECT_THROW(structured_solve(H, Vector::Ones(2)), NumericalError);
}

TEST(StructuredSolve, ApplyMatchesDense)
{
    Rng rng(9);
    const BlockDiagPlusLowRank H = random_structured(10, 3, 3, rng, true);
    const Vector v = gauss(H.size(), rng);
    EXPECT_LE((H.apply(v) - H.dense() * v).norm(), 1e-12 * (1.0 + v.norm()));
}

TEST(StructuredSolve, CostGrowsLinearly)
{
    // Best-of-7 over 4x size steps; linear cost gives a ratio near 4, quadratic 16.
    // Small sizes are avoided since there per-call overhead and cache effects dominate.
    Rng rng(10);
    auto time_solve = [&](Index n) {
        const BlockDiagPlusLowRank H = random_structured(n / 2, 0, 6, rng);
        const Vector rhs = gauss(H.size(), rng);
        double best = std::numeric_limits<double>::infinity();
        for (int rep = 0; rep < 7; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            for (int it = 0; it < 20; ++it) {
                const Vector x = structured_solve(H, rhs);
                EXPECT_TRUE(x.allFinite());
            }
            best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        return best;
    };
    const double t2 = time_solve(2000);
    const double t4 = time_solve(4000);
    const double t8 = time_solve(8000);
    const double t16 = time_solve(16000);
    EXPECT_LE(t8 / t2, 8.0);
    EXPECT_LE(t16 / t4, 8.0);
}
