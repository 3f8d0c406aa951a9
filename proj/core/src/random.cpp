#include "qquant/random.hpp"

#include <boost/random/beta_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace qquant {

std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

std::uint64_t derive_seed(std::uint64_t master, SeedFamily family, std::uint64_t index) noexcept {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(family)), index);
}

const char* to_string(SeedFamily family) noexcept {
  switch (family) {
    case SeedFamily::data: return "data";
    case SeedFamily::grid: return "grid";
    case SeedFamily::bootstrap: return "bootstrap";
    case SeedFamily::folds: return "folds";
    case SeedFamily::monte_carlo: return "monte_carlo";
    case SeedFamily::replicate: return "replicate";
  }
  return "unknown";
}

double uniform01(Rng& rng) { return boost::random::uniform_01<double>()(rng); }

double standard_normal(Rng& rng) { return boost::random::normal_distribution<double>(0.0, 1.0)(rng); }

double beta(Rng& rng, double a, double b) { return boost::random::beta_distribution<double>(a, b)(rng); }

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return boost::random::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace qquant
