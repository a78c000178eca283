#pragma once

// Seeded random instances for property checks and the CLI suite.

#include <cstdint>
#include <random>
#include <string_view>

#include "bitraj/matrix.hpp"
#include "bitraj/system.hpp"

namespace bitraj {

// Reported alongside suite results.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64/std::normal_distribution(0,1)";

class InstanceGenerator {
 public:
  explicit InstanceGenerator(std::uint64_t seed) : engine_(seed) {}

  double normal();
  double uniform(double lo, double hi);
  std::size_t index(std::size_t n);

  // (G + G^dagger)/2 with i.i.d. standard normal real and imaginary parts.
  ComplexMatrix hermitian(std::size_t d);
  ComplexMatrix unitary(std::size_t d);
  // Fine-grained observable from the eigenbasis of a random Hermitian; outcome
  // values 0..d-1.
  Observable fine_observable(std::size_t d, std::string name);
  // Random partition of a fine observable of d outcomes into `cells` groups.
  Observable coarse_observable(std::size_t d, std::size_t cells, std::string name);
  Resolution resolution(const Observable& obs);
  // Random normalized weights over `count` entries.
  std::vector<double> weights(std::size_t count);
  InitializationEvent initialization(const QuantumSystem& sys, double time);
  ComplexMatrix density(std::size_t d);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace bitraj
