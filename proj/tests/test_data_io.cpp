#include <doctest.h>

#include <map>
#include <set>
#include <string>

#include "oracles.hpp"
#include "sagda/data_io.hpp"

using namespace sagda;

TEST_CASE("parse basic libsvm text") {
  const Dataset d = parse_libsvm_text("+1 1:0.5 3:2\n-1 2:1 # comment\n\n# full comment line\n0 4:-1e-3\n");
  REQUIRE(d.samples.size() == 3);
  CHECK(d.dimension == 4);
  CHECK(d.samples[0].label == 1.0);
  CHECK(d.samples[0].features == Vector{0.5, 0.0, 2.0, 0.0});
  CHECK(d.samples[1].label == -1.0);
  CHECK(d.samples[1].features == Vector{0.0, 1.0, 0.0, 0.0});
  CHECK(d.samples[2].features[3] == -1e-3);
}

TEST_CASE("min_dimension pads features") {
  const Dataset d = parse_libsvm_text("1 2:1\n", 123);
  CHECK(d.dimension == 123);
  CHECK(d.samples[0].features.size() == 123);
}

TEST_CASE("parse errors carry line numbers") {
  auto line_of = [](const std::string& text) {
    try {
      parse_libsvm_text(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("1 1:1\n1 2 3\n") == 2);
  CHECK(line_of("1 1:1\n1 1:1\nabc 1:1\n") == 3);
  CHECK(line_of("1 0:1\n") == 1);
  CHECK(line_of("1 3:1 2:1\n") == 1);
  CHECK(line_of("1 2:1 2:1\n") == 1);
  CHECK(line_of("1 x:1\n") == 1);
  CHECK(line_of("1 1:y\n") == 1);
  CHECK_THROWS_AS(load_libsvm_file("/nonexistent/file"), std::runtime_error);
}

TEST_CASE("parser agrees with the reference reader") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const std::string text = oracle::random_libsvm_text(40, 30, seed, seed % 2 == 0);
    const Dataset d = parse_libsvm_text(text);
    const auto ref = oracle::ref_parse_libsvm(text);
    REQUIRE(d.samples.size() == ref.size());
    for (std::size_t r = 0; r < ref.size(); ++r) {
      CHECK(d.samples[r].label == ref[r].label);
      std::map<long, double> nz;
      for (auto [k, v] : ref[r].entries) nz[k] = v;
      for (std::size_t k = 0; k < d.samples[r].features.size(); ++k) {
        const auto it = nz.find(static_cast<long>(k + 1));
        CHECK(d.samples[r].features[k] == (it == nz.end() ? 0.0 : it->second));
      }
    }
  }
}

TEST_CASE("serialize then parse is the identity") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const std::string text = oracle::random_libsvm_text(50, 123, seed, seed % 2 == 1);
    const Dataset d = parse_libsvm_text(text, 123);
    const std::string out = serialize_libsvm(d.samples);
    const Dataset back = parse_libsvm_text(out, 123);
    CHECK(back.samples == d.samples);
    CHECK(serialize_libsvm(back.samples) == out);
  }
}

TEST_CASE("label-sorted partition gives homogeneous equal shards") {
  const auto samples = oracle::toy_samples(5000, 3, 1);
  const Partition p = partition(samples, 100, PartitionMode::label_sorted);
  REQUIRE(p.num_clients() == 100);
  CHECK(p.dropped == 0);
  std::set<std::size_t> all;
  for (const auto& shard : p.shards) {
    CHECK(shard.size() == 100);
    for (auto i : shard) {
      CHECK(samples[i].label == samples[shard.front()].label);
      all.insert(i);
    }
  }
  CHECK(all.size() == 10000);
}

TEST_CASE("partition drops the tail and validates counts") {
  const auto samples = oracle::toy_samples(5, 2, 2);  // 10 samples
  const Partition p = partition(samples, 3, PartitionMode::iid_shuffle, 4);
  CHECK(p.shard_size() == 3);
  CHECK(p.dropped == 1);
  CHECK_THROWS(partition(samples, 0, PartitionMode::iid_shuffle));
  CHECK_THROWS(partition(samples, 11, PartitionMode::label_sorted));
  CHECK(partition(samples, 3, PartitionMode::iid_shuffle, 4).shards == p.shards);
}

TEST_CASE("binarize and subsample") {
  std::vector<Sample> samples;
  for (int i = 0; i < 30; ++i) samples.push_back({Vector{double(i)}, double(i % 3)});
  const auto out = binarize_and_subsample(samples, [](double l) { return l == 0.0; }, 5, 9);
  REQUIRE(out.size() == 10);
  int pos = 0;
  for (const auto& s : out) {
    pos += s.label == 1.0;
    const int orig = static_cast<int>(s.features[0]);
    CHECK((orig % 3 == 0) == (s.label == 1.0));
  }
  CHECK(pos == 5);
  for (std::size_t i = 1; i < out.size(); ++i) CHECK(out[i - 1].features[0] < out[i].features[0]);
  CHECK_THROWS(binarize_and_subsample(samples, [](double l) { return l == 0.0; }, 11, 9));
}
