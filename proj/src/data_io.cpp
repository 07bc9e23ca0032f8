#include "sagda/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <utility>

#include "sagda/rng.hpp"

namespace sagda {

ParseError::ParseError(std::size_t line, const std::string& reason)
    : std::runtime_error("line " + std::to_string(line) + ": " + reason), line_(line) {}

namespace {

struct SparseRow {
  double label;
  std::vector<std::pair<std::size_t, double>> entries;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

double parse_real(std::string_view tok, std::size_t line, const char* what) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    throw ParseError(line, std::string("non-numeric ") + what + " '" + std::string(tok) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(line, std::string("non-finite ") + what + " '" + std::string(tok) + "'");
  }
  return value;
}

std::size_t parse_index(std::string_view tok, std::size_t line) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    throw ParseError(line, "non-numeric index '" + std::string(tok) + "'");
  }
  if (value == 0) throw ParseError(line, "indices are 1-based, got 0");
  return value;
}

std::vector<std::string_view> split_tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, std::size_t min_dimension) {
  std::vector<SparseRow> rows;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    auto tokens = split_tokens(view);
    if (tokens.empty()) continue;

    SparseRow row;
    row.label = parse_real(tokens[0], line_no, "label");
    std::size_t prev = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      auto colon = tokens[t].find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "missing ':' in '" + std::string(tokens[t]) + "'");
      }
      std::size_t index = parse_index(tokens[t].substr(0, colon), line_no);
      double value = parse_real(tokens[t].substr(colon + 1), line_no, "value");
      if (index <= prev) {
        throw ParseError(line_no, "indices not strictly increasing at " + std::to_string(index));
      }
      prev = index;
      row.entries.emplace_back(index, value);
    }
    max_index = std::max(max_index, prev);
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw std::runtime_error("parse_libsvm: read error");

  Dataset ds;
  ds.dimension = std::max(max_index, min_dimension);
  ds.samples.reserve(rows.size());
  for (const auto& row : rows) {
    Sample s{Vector(ds.dimension), row.label};
    for (auto [index, value] : row.entries) s.features[index - 1] = value;
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

Dataset parse_libsvm_text(std::string_view text, std::size_t min_dimension) {
  std::istringstream in{std::string(text)};
  return parse_libsvm(in, min_dimension);
}

Dataset load_libsvm_file(const std::string& path, std::size_t min_dimension) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  try {
    return parse_libsvm(in, min_dimension);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + std::string(e.what()));
  }
}

std::string serialize_libsvm(const std::vector<Sample>& samples) {
  std::string out;
  char buf[64];
  auto put = [&](double v) {
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
  };
  for (const auto& s : samples) {
    put(s.label);
    for (std::size_t i = 0; i < s.features.size(); ++i) {
      if (s.features[i] == 0.0) continue;
      out += ' ';
      out += std::to_string(i + 1);
      out += ':';
      put(s.features[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<Sample> binarize_and_subsample(const std::vector<Sample>& samples,
                                           const LabelPredicate& positive,
                                           std::size_t per_class,
                                           std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (positive(samples[i].label) ? pos : neg).push_back(i);
  }
  if (pos.size() < per_class || neg.size() < per_class) {
    throw std::invalid_argument("binarize_and_subsample: need " + std::to_string(per_class) +
                                " per class, have " + std::to_string(pos.size()) +
                                " positive and " + std::to_string(neg.size()) + " negative");
  }
  RngStream pos_rng(seed, StreamPurpose::data_selection, 1, 0);
  RngStream neg_rng(seed, StreamPurpose::data_selection, 0, 0);
  std::vector<std::size_t> keep;
  keep.reserve(2 * per_class);
  for (std::size_t k : sample_without_replacement(pos.size(), per_class, pos_rng)) keep.push_back(pos[k]);
  for (std::size_t k : sample_without_replacement(neg.size(), per_class, neg_rng)) keep.push_back(neg[k]);
  std::sort(keep.begin(), keep.end());

  std::vector<Sample> out;
  out.reserve(keep.size());
  for (std::size_t i : keep) {
    Sample s = samples[i];
    s.label = positive(s.label) ? 1.0 : -1.0;
    out.push_back(std::move(s));
  }
  return out;
}

Partition partition(const std::vector<Sample>& samples, std::size_t clients,
                    PartitionMode mode, std::uint64_t seed) {
  if (clients == 0) throw std::invalid_argument("partition: client count must be positive");
  if (clients > samples.size()) {
    throw std::invalid_argument("partition: " + std::to_string(clients) + " clients for " +
                                std::to_string(samples.size()) + " samples");
  }
  std::vector<std::size_t> order;
  if (mode == PartitionMode::label_sorted) {
    order.resize(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return samples[a].label < samples[b].label;
    });
  } else {
    RngStream rng(seed, StreamPurpose::data_selection, 2, 0);
    order = shuffled_indices(samples.size(), rng);
  }

  Partition p;
  p.mode = mode;
  const std::size_t n = samples.size() / clients;
  p.dropped = samples.size() - n * clients;
  p.shards.resize(clients);
  for (std::size_t c = 0; c < clients; ++c) {
    p.shards[c].assign(order.begin() + static_cast<std::ptrdiff_t>(c * n),
                       order.begin() + static_cast<std::ptrdiff_t>((c + 1) * n));
  }
  return p;
}

PartitionMode parse_partition_mode(std::string_view name) {
  if (name == "label_sorted") return PartitionMode::label_sorted;
  if (name == "iid_shuffle" || name == "iid") return PartitionMode::iid_shuffle;
  throw std::invalid_argument("unknown partition mode '" + std::string(name) + "'");
}

std::string_view to_string(PartitionMode mode) {
  return mode == PartitionMode::label_sorted ? "label_sorted" : "iid_shuffle";
}

}  // namespace sagda
