#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace spe {

/// Child-stream key for replication `index` of a base seed.
///
/// Splitting rule (documented, stable across releases): the pair
/// (seed, index) is hashed by two rounds of splitmix64 with the index
/// offset by the splitmix increment, so neighbouring indices give
/// statistically independent streams and index 0 differs from the base.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Deterministic random source.
///
/// Wraps std::mt19937_64 (whose output sequence is pinned by the
/// standard) and implements all distribution transforms in-house, so a
/// seed produces bit-identical draws on every platform and standard
/// library. std::normal_distribution and friends are deliberately not
/// used: their algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on [0,1), 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Standard normal via Box-Muller; the paired draw is cached.
  double normal();

  /// Exponential with rate 1 by inversion.
  double exponential();

  /// Gamma(shape, 1) for shape >= 1, Marsaglia-Tsang squeeze-rejection.
  double gamma(double shape);

  /// Index s with probability weights[s]; weights must sum to ~1.
  int categorical(const Eigen::VectorXd& weights);

  /// k distinct indices from {0,...,n-1}, partial Fisher-Yates order.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::mt19937_64 gen_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace spe
