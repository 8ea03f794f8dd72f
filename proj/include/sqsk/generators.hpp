#pragma once

#include "sqsk/data.hpp"

#include <cstdint>
#include <vector>

namespace sqsk {

/// i.i.d. N(0,1) design (n x m), response X^T w + noise * N(0,1) with a planted
/// `sparsity`-sparse w whose nonzeros are +-1.
Dataset gaussian_regression(Index n, Index m, Index sparsity, double noise, std::uint64_t seed);

/// Design driven by `rank` latent factors plus isotropic noise of size `noise`:
/// X = L F^T / sqrt(rank) + noise * E. Response as in gaussian_regression.
Dataset latent_factor_regression(Index n, Index m, Index rank, double noise, Index sparsity, double response_noise,
                                 std::uint64_t seed);

/// Latent-factor design with +-1 labels sign(X^T w) for a planted sparse w;
/// each label is flipped with probability `label_noise`.
Dataset sparse_classification(Index n, Index m, Index rank, Index sparsity, double label_noise, std::uint64_t seed);

/// Features in consecutive blocks of `block_size`; every feature of a block is a
/// noisy copy of that block's latent signal. Feature f belongs to block f / block_size.
Dataset correlated_blocks(Index blocks, Index block_size, Index m, double noise, std::uint64_t seed);

/// Planted support of the generators above (sorted).
std::vector<Index> planted_support(Index n, Index sparsity, std::uint64_t seed);

} // namespace sqsk
