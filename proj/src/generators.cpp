#include "sqsk/generators.hpp"

#include "sqsk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace sqsk {

namespace {

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    Matrix M(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) M(i, j) = nd(rng);
    return M;
}

Vector planted_weights(Index n, Index sparsity, std::uint64_t seed)
{
    Vector w = Vector::Zero(n);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::bernoulli_distribution coin;
    for (Index i : planted_support(n, sparsity, seed)) w(i) = coin(rng) ? 1.0 : -1.0;
    return w;
}

void check_shape(Index n, Index m, Index sparsity)
{
    if (n < 1 || m < 1) throw InputError("generator: n and m must be positive");
    if (sparsity < 0 || sparsity > n) throw InputError("generator: sparsity must lie in [0, n]");
}

Matrix latent_design(Index n, Index m, Index rank, double noise, std::mt19937_64& rng)
{
    if (rank < 1) throw InputError("generator: rank must be positive");
    const Matrix L = gaussian(n, rank, rng);
    const Matrix F = gaussian(m, rank, rng);
    Matrix X = L * F.transpose() / std::sqrt(static_cast<double>(rank));
    X += noise * gaussian(n, m, rng);
    return X;
}

} // namespace

std::vector<Index> planted_support(Index n, Index sparsity, std::uint64_t seed)
{
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::mt19937_64 rng(seed + 17);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(sparsity));
    std::sort(idx.begin(), idx.end());
    return idx;
}

Dataset gaussian_regression(Index n, Index m, Index sparsity, double noise, std::uint64_t seed)
{
    check_shape(n, m, sparsity);
    std::mt19937_64 rng(seed);
    Dataset d;
    Matrix X = gaussian(n, m, rng);
    d.y = X.transpose() * planted_weights(n, sparsity, seed);
    d.y += noise * gaussian(m, 1, rng);
    d.X = DataMatrix(std::move(X));
    return d;
}

Dataset latent_factor_regression(Index n, Index m, Index rank, double noise, Index sparsity, double response_noise,
                                 std::uint64_t seed)
{
    check_shape(n, m, sparsity);
    std::mt19937_64 rng(seed);
    Matrix X = latent_design(n, m, rank, noise, rng);
    Dataset d;
    d.y = X.transpose() * planted_weights(n, sparsity, seed);
    d.y += response_noise * gaussian(m, 1, rng);
    d.X = DataMatrix(std::move(X));
    return d;
}

Dataset sparse_classification(Index n, Index m, Index rank, Index sparsity, double label_noise, std::uint64_t seed)
{
    check_shape(n, m, sparsity);
    if (!(label_noise >= 0.0 && label_noise <= 1.0)) throw InputError("generator: label_noise must lie in [0, 1]");
    std::mt19937_64 rng(seed);
    Matrix X = latent_design(n, m, rank, 0.1, rng);
    const Vector score = X.transpose() * planted_weights(n, sparsity, seed);
    std::bernoulli_distribution flip(label_noise);
    Dataset d;
    d.y.resize(m);
    for (Index j = 0; j < m; ++j) {
        const double label = score(j) >= 0.0 ? 1.0 : -1.0;
        d.y(j) = flip(rng) ? -label : label;
    }
    d.X = DataMatrix(std::move(X));
    return d;
}

Dataset correlated_blocks(Index blocks, Index block_size, Index m, double noise, std::uint64_t seed)
{
    if (blocks < 1 || block_size < 1) throw InputError("generator: need at least one block of one feature");
    check_shape(blocks * block_size, m, 0);
    std::mt19937_64 rng(seed);
    const Matrix Z = gaussian(blocks, m, rng);
    Matrix X(blocks * block_size, m);
    for (Index b = 0; b < blocks; ++b)
        X.middleRows(b * block_size, block_size) = Z.row(b).replicate(block_size, 1);
    X += noise * gaussian(X.rows(), m, rng);
    Dataset d;
    d.y = Vector::Zero(m);
    d.X = DataMatrix(std::move(X));
    return d;
}

} // namespace sqsk
