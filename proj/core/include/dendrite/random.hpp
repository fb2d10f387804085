#pragma once

#include <cstdint>

namespace dendrite {

enum class RandomDistribution {
  uniform,  // U[0, 1]
  beta_f,   // F(d1, d2) mapped to [0, 1] by x -> d1 x / (d1 x + d2), i.e. Beta(d1/2, d2/2)
};

/// Counter-based draw in [0, 1]: a pure function of (seed, index), so any
/// evaluation order reproduces the same stream.
[[nodiscard]] double random_field(std::uint64_t seed, std::uint64_t index,
                                  RandomDistribution dist = RandomDistribution::uniform);

/// Packs (time step, cell, quadrature point, channel) into a draw index.
[[nodiscard]] constexpr std::uint64_t draw_index(std::uint64_t step, std::uint64_t cell,
                                                 std::uint64_t point, std::uint64_t channel) {
  return (channel << 62) ^ (step << 40) ^ (cell << 8) ^ point;
}

/// Multiplies right-hand-side source evaluations by (1 - epsilon * randf).
struct Perturbation {
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  RandomDistribution distribution = RandomDistribution::uniform;

  [[nodiscard]] bool active() const { return epsilon != 0.0; }
  [[nodiscard]] double factor(std::uint64_t index) const {
    return active() ? 1.0 - epsilon * random_field(seed, index, distribution) : 1.0;
  }
};

}  // namespace dendrite
