#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the code under test except for problem
// values and data containers.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sagda/dataset_problems.hpp"
#include "sagda/problem.hpp"
#include "sagda/synthetic_pl.hpp"

namespace oracle {

using sagda::Gradient;
using sagda::MinMaxProblem;
using sagda::Point;
using sagda::Vector;

/// Central differences of f = problem.value at z.
inline Gradient fd_gradient(const MinMaxProblem& p, const Point& z, double h = 1e-6) {
  Gradient g{Vector(z.x.size()), Vector(z.y.size())};
  Point w = z;
  for (std::size_t k = 0; k < z.x.size(); ++k) {
    w.x[k] = z.x[k] + h;
    const double up = p.value(w);
    w.x[k] = z.x[k] - h;
    const double dn = p.value(w);
    w.x[k] = z.x[k];
    g.x[k] = (up - dn) / (2.0 * h);
  }
  for (std::size_t k = 0; k < z.y.size(); ++k) {
    w.y[k] = z.y[k] + h;
    const double up = p.value(w);
    w.y[k] = z.y[k] - h;
    const double dn = p.value(w);
    w.y[k] = z.y[k];
    g.y[k] = (up - dn) / (2.0 * h);
  }
  return g;
}

/// max_j |a_j - b_j| / max(1, max_j |b_j|), over both blocks.
inline double rel_error(const Gradient& a, const Gradient& b) {
  double diff = 0.0, ref = 1.0;
  for (std::size_t k = 0; k < a.x.size(); ++k) {
    diff = std::max(diff, std::fabs(a.x[k] - b.x[k]));
    ref = std::max(ref, std::fabs(b.x[k]));
  }
  for (std::size_t k = 0; k < a.y.size(); ++k) {
    diff = std::max(diff, std::fabs(a.y[k] - b.y[k]));
    ref = std::max(ref, std::fabs(b.y[k]));
  }
  return diff / ref;
}

struct RefRow {
  double label = 0.0;
  std::vector<std::pair<long, double>> entries;  // 1-based index, value
};

/// Minimal LIBSVM reader: whitespace tokens, strtod/strtol, no validation
/// beyond what the test inputs need.
inline std::vector<RefRow> ref_parse_libsvm(const std::string& text) {
  std::vector<RefRow> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    RefRow r;
    r.label = std::strtod(tok.c_str(), nullptr);
    while (ls >> tok) {
      const auto colon = tok.find(':');
      r.entries.emplace_back(std::strtol(tok.substr(0, colon).c_str(), nullptr, 10),
                             std::strtod(tok.substr(colon + 1).c_str(), nullptr));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Random a9a-style text: labels +1/-1, sparse binary-ish features.
inline std::string random_libsvm_text(std::size_t rows, std::size_t dim, unsigned seed,
                                      bool binary_values = true) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  std::ostringstream os;
  os.precision(17);
  for (std::size_t r = 0; r < rows; ++r) {
    os << (u(gen) < 0.5 ? "-1" : "+1");
    for (std::size_t k = 1; k <= dim; ++k) {
      if (u(gen) < 0.3) {
        os << ' ' << k << ':';
        if (binary_values) os << 1;
        else os << n(gen);
      }
    }
    os << '\n';
  }
  return os.str();
}

/// Balanced toy samples with +1/-1 labels and Gaussian features.
inline std::vector<sagda::Sample> toy_samples(std::size_t per_class, std::size_t dim, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<sagda::Sample> out;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    sagda::Sample s{Vector(dim), i % 2 == 0 ? 1.0 : -1.0};
    for (std::size_t k = 0; k < dim; ++k) s.features[k] = n(gen) + 0.5 * s.label;
    out.push_back(std::move(s));
  }
  return out;
}

inline sagda::ClientShards toy_shards(std::size_t M, std::size_t n, std::size_t dim, unsigned seed,
                                      sagda::PartitionMode mode = sagda::PartitionMode::iid_shuffle) {
  const auto samples = toy_samples(M * n / 2 + (M * n) % 2, dim, seed);
  std::vector<sagda::Sample> trimmed(samples.begin(), samples.begin() + static_cast<long>(M * n));
  return sagda::ClientShards::from_partition(trimmed, sagda::partition(trimmed, M, mode, seed));
}

inline Point random_point(std::size_t dx, std::size_t dy, unsigned seed, double scale = 1.0) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> n(0.0, scale);
  Point z{Vector(dx), Vector(dy)};
  for (double& v : z.x) v = n(gen);
  for (double& v : z.y) v = n(gen);
  return z;
}

// ------------------------------------------------------------------------
// Learning-rate conditions, transcribed term by term. Returns the left-hand
// sides in checker order; the first compares against 1 (<=), the rest
// against 0 (>=).

struct LrInputs {
  double Lf, mu, exl, eyl, exg, eyg;
  double K;
  double M = 1, m = 1;
};

inline double safe_ratio(double a, double b) {
  if (b == 0.0) return a == 0.0 ? 0.0 : INFINITY;
  return a / b;
}

inline std::vector<double> ref_option1(const LrInputs& in) {
  const double L = in.Lf + in.Lf * in.Lf / in.mu;
  const double ex = in.exl * in.exg, ey = in.eyl * in.eyg, K = in.K, Lf = in.Lf;
  const double first = 8 * K * (K - 1) * (2 * K - 1) * Lf * Lf * std::max(in.exl * in.exl, in.eyl * in.eyl);
  const double a1 = K * Lf * Lf * ((31.0 / 20) * ex + (1.0 / 20) * ey);
  const double a2 = (1.0 / 2) * (L + Lf / 10) + 1 + (in.M * in.M) / (in.m * in.m) - in.M / in.m;
  const double br = a1 + a2 * 4 * Lf * Lf * K * K * (ex * ex + ey * ey);
  const double second = 1.0 / 2 - 4 * a2 * Lf * Lf * K * K * (ex * ex + ey * ey) -
                        br * 160 * K * K * (in.exl * in.exl + in.eyl * in.eyl) * Lf * Lf;
  const double third = ((1.0 / 10) * ex * K - 4 * a2 * K * K * ex * ex) - br * 40 * K * K * in.exl * in.exl;
  const double fourth = (ey * K * ((1.0 / 20) - safe_ratio(ex, ey) * (Lf * Lf) / (in.mu * in.mu)) -
                         4 * a2 * K * K * ey * ey) -
                        br * 40 * K * K * in.eyl * in.eyl;
  return {first, second, third, fourth};
}

inline std::vector<double> ref_option2(const LrInputs& in) {
  const double L = in.Lf + in.Lf * in.Lf / in.mu;
  const double ex = in.exl * in.exg, ey = in.eyl * in.eyg, K = in.K, Lf = in.Lf;
  const double first = 8 * K * (K - 1) * (2 * K - 1) * Lf * Lf * std::max(in.exl * in.exl, in.eyl * in.eyl);
  const double b1 = Lf * Lf *
                    ((31.0 / 20) * ex * K + (1.0 / 20) * ey * K + 2 * (L + Lf / 10) * ex * ex * K * K +
                     (1.0 / 5) * Lf * ey * ey * K * K);
  const double second = (1.0 / 10) * ex * K - (2 * (L + Lf / 10) * ex * ex * K * K + 40 * K * K * in.exl * in.exl * b1);
  const double third = ey * K * ((1.0 / 20) - safe_ratio(ex, ey) * (Lf * Lf) / (in.mu * in.mu)) -
                       ((1.0 / 5) * Lf * ey * ey * K * K + 40 * K * K * in.eyl * in.eyl * b1);
  return {first, second, third};
}

inline std::vector<double> ref_fsgda(const LrInputs& in) {
  const double L = in.Lf + in.Lf * in.Lf / in.mu;
  const double ex = in.exl * in.exg, ey = in.eyl * in.eyg, K = in.K, Lf = in.Lf;
  const double first = 8 * K * (K - 1) * (2 * K - 1) * Lf * Lf * std::max(in.exl * in.exl, in.eyl * in.eyl);
  const double a1 = (1.0 / 10) - 2 * (2 * L + (1.0 / 5) * Lf) * ex * K;
  const double a2 = (1.0 / 20) - (2.0 / 5) * Lf * ey * K - safe_ratio(ex, ey) * (Lf * Lf) / (in.mu * in.mu);
  const double a3 = (31.0 / 20) + (2 * L + (1.0 / 5) * Lf) * ex * K;
  const double a4 = (1.0 / 20) + (1.0 / 5) * Lf * ey * K;
  const double second = a1 - a3 * 40 * Lf * Lf * K * K * in.exl * in.exl -
                        safe_ratio(ey, ex) * a4 * 40 * Lf * Lf * K * K * in.exl * in.exl;
  const double third = a2 - a3 * safe_ratio(ex, ey) * 40 * Lf * Lf * K * K * in.eyl * in.eyl -
                       a4 * 40 * Lf * Lf * K * K * in.eyl * in.eyl;
  return {first, second, third};
}

/// |a - b| <= tol * max(|a|, |b|), with exact match required at zero.
inline bool close_rel(double a, double b, double tol) {
  if (a == b) return true;
  return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b));
}

}  // namespace oracle
