#pragma once

#include <cstdint>
#include <random>

namespace loopforge {

// splitmix64 step; used only to derive seeds, never as the sampling generator.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// One independent stream per replica: the stream depends only on (root seed,
// replica index), so results are byte-identical no matter how replicas are
// scheduled across worker threads.
inline std::mt19937_64 replica_rng(std::uint64_t root_seed, std::uint64_t replica) {
  std::uint64_t s = root_seed ^ (0x9e3779b97f4a7c15ULL * (replica + 1));
  const std::uint64_t a = splitmix64(s);
  const std::uint64_t b = splitmix64(s);
  std::mt19937_64 gen(a ^ (b << 1));
  gen.discard(8);  // decorrelate nearby seeds
  return gen;
}

inline double std_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

inline double exponential(std::mt19937_64& rng, double rate) {
  std::exponential_distribution<double> e(rate);
  return e(rng);
}

inline double uniform01(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng);
}

inline long poisson(std::mt19937_64& rng, double mean) {
  std::poisson_distribution<long> p(mean);
  return p(rng);
}

}  // namespace loopforge
