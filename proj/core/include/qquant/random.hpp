#pragma once

// Seeded randomness. The engine is std::mt19937_64 (fully specified by the
// standard); distributions come from Boost.Random so a given seed produces
// the same stream with any standard library.

#include <cstddef>
#include <cstdint>
#include <random>

namespace qquant {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Child seed for replicate/stream `index` of `master`. Adding streams never
/// changes the seeds of existing ones.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Seed family identifiers, so that e.g. data generation and grid training
/// for the same replicate never share a stream.
enum class SeedFamily : std::uint64_t {
  data = 1,
  grid = 2,
  bootstrap = 3,
  folds = 4,
  monte_carlo = 5,
  replicate = 6,
};

std::uint64_t derive_seed(std::uint64_t master, SeedFamily family, std::uint64_t index) noexcept;

const char* to_string(SeedFamily family) noexcept;

double uniform01(Rng& rng);
double standard_normal(Rng& rng);
double beta(Rng& rng, double a, double b);
/// Uniform integer in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);

}  // namespace qquant
