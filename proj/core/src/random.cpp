#include "dendrite/random.hpp"

#include <random>

namespace dendrite {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Degrees of freedom of the F(d1, d2) variant.
constexpr double kFNumerator = 5.0;
constexpr double kFDenominator = 10.0;

}  // namespace

double random_field(std::uint64_t seed, std::uint64_t index, RandomDistribution dist) {
  const std::uint64_t bits = splitmix64(splitmix64(seed) ^ index);
  if (dist == RandomDistribution::uniform) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }
  std::mt19937_64 engine(bits);
  std::gamma_distribution<double> num(0.5 * kFNumerator, 1.0);
  std::gamma_distribution<double> den(0.5 * kFDenominator, 1.0);
  const double a = num(engine);
  const double b = den(engine);
  return a / (a + b);
}

}  // namespace dendrite
