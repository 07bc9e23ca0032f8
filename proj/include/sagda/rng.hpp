#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sagda {

/// What a random stream is used for. Streams with different purposes never
/// share state, so disabling one consumer cannot shift another's draws.
enum class StreamPurpose : std::uint64_t {
  sampling = 1,
  local_steps = 2,
  variate_refresh = 3,
  variate_init = 4,
  init_point = 5,
  estimation = 6,
  problem_build = 7,
  data_selection = 8,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Deterministic seed for the stream identified by (seed, purpose, client, round).
std::uint64_t derive_seed(std::uint64_t seed, StreamPurpose purpose,
                          std::uint64_t client, std::uint64_t round) noexcept;

class RngStream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t client,
            std::uint64_t round)
      : engine_(derive_seed(seed, purpose, client, round)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n);
  double standard_normal();

 private:
  std::mt19937_64 engine_;
};

/// m distinct indices from [0, n), via partial Fisher-Yates, sorted ascending.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m,
                                                    RngStream& rng);

/// Seeded Fisher-Yates shuffle of [0, n).
std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream& rng);

}  // namespace sagda
