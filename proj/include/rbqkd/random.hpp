// Seeded random operators for property tests and instance generation.
#pragma once

#include "rbqkd/core.hpp"

#include <cstdint>
#include <random>

namespace rbqkd {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; derives independent stream seeds from (seed, counter).
std::uint64_t splitmix(std::uint64_t seed, std::uint64_t counter);

ComplexMatrix random_ginibre(std::size_t rows, std::size_t cols, Rng& rng);

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
ComplexMatrix random_unitary(std::size_t d, Rng& rng);

/// Haar-random isometry C^d_in → C^d_out.
Isometry random_isometry(std::size_t d_in, std::size_t d_out, Rng& rng);

PureState random_pure_state(const Dims& dims, Rng& rng);

/// G G† / tr for a Ginibre G of the given rank (full rank when rank = 0).
DensityOperator random_density(const Dims& dims, Rng& rng, std::size_t rank = 0);

/// Orthogonal projector onto a Haar-random subspace of dimension `rank`.
ComplexMatrix random_projector(std::size_t d, std::size_t rank, Rng& rng);

}  // namespace rbqkd
