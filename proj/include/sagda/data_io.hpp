#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sagda/linalg.hpp"

namespace sagda {

struct Sample {
  Vector features;
  double label = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::vector<Sample> samples;
  std::size_t dimension = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& reason);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Reads LIBSVM text: `<label> (<index>:<value>)*` per line, 1-based strictly
/// increasing indices, `#` to end of line is a comment. Features are densified
/// to length max(max index seen, min_dimension).
Dataset parse_libsvm(std::istream& in, std::size_t min_dimension = 0);
Dataset parse_libsvm_text(std::string_view text, std::size_t min_dimension = 0);
Dataset load_libsvm_file(const std::string& path, std::size_t min_dimension = 0);

/// Emits nonzero entries only, with shortest round-trip decimal formatting.
std::string serialize_libsvm(const std::vector<Sample>& samples);

using LabelPredicate = std::function<bool(double)>;

/// Keeps per_class samples on each side of the predicate (+1 where it holds,
/// -1 otherwise). Selection is seeded; the output keeps the original order.
std::vector<Sample> binarize_and_subsample(const std::vector<Sample>& samples,
                                           const LabelPredicate& positive,
                                           std::size_t per_class,
                                           std::uint64_t seed);

enum class PartitionMode { label_sorted, iid_shuffle };

struct Partition {
  std::vector<std::vector<std::size_t>> shards;
  PartitionMode mode = PartitionMode::label_sorted;
  std::size_t dropped = 0;  // tail samples removed so that M divides the count

  std::size_t num_clients() const noexcept { return shards.size(); }
  std::size_t shard_size() const noexcept {
    return shards.empty() ? 0 : shards.front().size();
  }
};

/// Splits sample indices into `clients` contiguous equal shards after a stable
/// sort by label (ascending) or a seeded shuffle. Any remainder is dropped from
/// the tail and counted in Partition::dropped.
Partition partition(const std::vector<Sample>& samples, std::size_t clients,
                    PartitionMode mode, std::uint64_t seed = 0);

PartitionMode parse_partition_mode(std::string_view name);
std::string_view to_string(PartitionMode mode);

}  // namespace sagda
