#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace commgp {

using Rng = std::mt19937_64;

// Stream tags for deriving independent substreams from one master seed.
// Keyed so that local and decentralized experiments draw identical streams
// for the shared stages (splits, Gibbs, policy randomness).
enum : std::uint64_t {
  kStreamSplit = 0x5eed5011u,
  kStreamGibbs = 0x5eed6155u,
  kStreamPolicy = 0x5eedc401u,
  kStreamSynth = 0x5eed5717u,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed,
                              std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(seed ^ 0x393fd9ab6f53b1c7ULL);
  for (std::uint64_t t : tags)
    h = splitmix64(h ^ t);
  return h;
}

inline Rng make_rng(std::uint64_t seed,
                    std::initializer_list<std::uint64_t> tags = {}) {
  return Rng(mix_seed(seed, tags));
}

// Distributions are hand-rolled on top of the raw generator so that results
// do not depend on the standard library's unspecified algorithms.

// Uniform on [0, 1).
inline double uniform_double(Rng &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on (0, 1].
inline double uniform_double_open(Rng &rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

inline double exponential(Rng &rng) { return -std::log(uniform_double_open(rng)); }

// Box-Muller; the sine partner is discarded to keep calls independent.
inline double normal(Rng &rng) {
  const double u1 = uniform_double_open(rng);
  const double u2 = uniform_double(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Unbiased bounded draw in [0, n) by rejection.
inline std::size_t uniform_index(Rng &rng, std::size_t n) {
  const std::uint64_t span = n;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % span);
}

template <typename T> void shuffle(std::vector<T> &v, Rng &rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

// k distinct indices from [0, n), in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    Rng &rng);

} // namespace commgp
