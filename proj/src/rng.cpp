#include "commgp/rng.hpp"

#include <numeric>

namespace commgp {

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    Rng &rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  // partial Fisher-Yates: the first k slots end up uniform without replacement
  for (std::size_t i = 0; i < k && i + 1 < n; ++i)
    std::swap(pool[i], pool[i + uniform_index(rng, n - i)]);
  pool.resize(k);
  return pool;
}

} // namespace commgp
