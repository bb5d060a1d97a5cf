#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace addpg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown on violated preconditions and numerical failures across the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.allFinite();
}

/// splitmix64 finalizer; used to derive independent stream seeds from one run seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine draw.
template <typename Engine>
double uniform01(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename Engine>
double uniform(Engine& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

}  // namespace addpg
