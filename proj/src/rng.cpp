#include "sagda/rng.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace sagda {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, StreamPurpose purpose,
                          std::uint64_t client, std::uint64_t round) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  h = splitmix64(h ^ client);
  h = splitmix64(h ^ round);
  return h;
}

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

double RngStream::standard_normal() {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m,
                                                    RngStream& rng) {
  if (m > n) throw std::invalid_argument("sample_without_replacement: m > n");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t j = k + rng.uniform_index(n - k);
    std::swap(pool[k], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t k = n; k > 1; --k) {
    const std::size_t j = rng.uniform_index(k);
    std::swap(idx[k - 1], idx[j]);
  }
  return idx;
}

}  // namespace sagda
