#pragma once

#include <cstdint>
#include <random>

#include "gip/sphere.hpp"

namespace gip {

constexpr std::uint64_t kDefaultSeed = 0x5EED;

/// Random engine for block `block` of a stream seeded by `seed`. Blocks are
/// independent and reproducible, so sampling loops can be split freely.
std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t block);

/// Uniform point on S^m, m = ambient_dim - 1.
UnitVector sample_uniform_sphere(std::size_t ambient_dim, std::mt19937_64& rng);

/// Uniform point in the closed cap of angular radius `radius` around `center`
/// (exact for S^1 and S^2, rejection sampling for higher m).
UnitVector sample_uniform_cap(const UnitVector& center, double radius, std::mt19937_64& rng);

/// Orthonormal frame (e_1, ..., e_m) of the tangent space at `pole` on S^2.
std::pair<UnitVector, UnitVector> tangent_frame(const UnitVector& pole);

double uniform01(std::mt19937_64& rng);

}  // namespace gip
