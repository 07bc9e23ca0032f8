#pragma once

#include <vector>

#include "sagda/data_io.hpp"
#include "sagda/problem.hpp"

namespace sagda {

/// Per-client copy of the partitioned samples. Labels must be +1 or -1.
struct ClientShards {
  std::size_t feature_dim = 0;
  std::vector<std::vector<Sample>> clients;

  static ClientShards from_partition(const std::vector<Sample>& samples, const Partition& p);
  std::size_t total_samples() const;
};

struct RobustLogRegParams {
  double lambda2 = 1e-3;
  double alpha = 10.0;
};

/// Distributionally robust logistic regression:
///   f_i(x, y) = (1/n) sum_j [ y_j l_ij(x) - V(y) + g(x) ]
///   l_ij(x)   = log(1 + exp(-b_ij a_ij^T x))
///   g(x)      = lambda2 sum_k alpha x_k^2 / (1 + alpha x_k^2)
///   V(y)      = (lambda1 / 2) ||n y - 1||^2,  lambda1 = 1 / n^2
/// y has one coordinate per local sample position j and is shared by all
/// clients, so every shard must have the same size n.
class RobustLogRegProblem final : public FiniteSumProblem {
 public:
  RobustLogRegProblem(ClientShards shards, RobustLogRegParams params = {});

  std::string_view name() const override { return "logreg_robust"; }
  std::size_t dim_x() const override { return shards_.feature_dim; }
  std::size_t dim_y() const override { return n_; }
  std::size_t num_clients() const override { return shards_.clients.size(); }
  std::size_t shard_size(std::size_t) const override { return n_; }

  Gradient sample_gradient(std::size_t client, std::size_t sample, const Point& z) const override;
  double sample_value(std::size_t client, std::size_t sample, const Point& z) const override;
  Gradient client_gradient(std::size_t client, const Point& z) const override;
  Vector client_gradient_y(std::size_t client, const Point& z) const override;
  double client_value(std::size_t client, const Point& z) const override;

  double lambda1() const noexcept { return lambda1_; }
  const RobustLogRegParams& params() const noexcept { return params_; }

  double regularizer(const Vector& x) const;          // g(x)
  Vector regularizer_gradient(const Vector& x) const; // grad g(x)
  double dual_penalty(const Vector& y) const;         // V(y)
  Vector dual_penalty_gradient(const Vector& y) const;

 private:
  double loss(std::size_t client, std::size_t sample, const Vector& x) const;

  ClientShards shards_;
  RobustLogRegParams params_;
  std::size_t n_;
  double lambda1_;
};

/// AUC maximization as a min-max problem over w = (x, c1, c2) in R^{d+2} and a
/// scalar dual lambda, with linear scorer h_x(a) = x^T a and a single global
/// positive fraction tau. Strongly concave in lambda with curvature 2 tau (1 - tau).
class AUCProblem final : public FiniteSumProblem {
 public:
  explicit AUCProblem(ClientShards shards);

  std::string_view name() const override { return "auc"; }
  std::size_t dim_x() const override { return shards_.feature_dim + 2; }
  std::size_t dim_y() const override { return 1; }
  std::size_t num_clients() const override { return shards_.clients.size(); }
  std::size_t shard_size(std::size_t client) const override;

  Gradient sample_gradient(std::size_t client, std::size_t sample, const Point& z) const override;
  double sample_value(std::size_t client, std::size_t sample, const Point& z) const override;
  Gradient client_gradient(std::size_t client, const Point& z) const override;
  double client_value(std::size_t client, const Point& z) const override;

  double tau() const noexcept { return tau_; }

 private:
  ClientShards shards_;
  double tau_;
};

}  // namespace sagda
