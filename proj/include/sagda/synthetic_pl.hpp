#pragma once

#include <cstdint>
#include <vector>

#include "sagda/problem.hpp"

namespace sagda {

/// Row-major dense square matrix, only what the synthetic problem needs.
struct SquareMatrix {
  std::size_t dim = 0;
  std::vector<double> data;

  explicit SquareMatrix(std::size_t n = 0, double fill = 0.0) : dim(n), data(n * n, fill) {}
  static SquareMatrix identity(std::size_t n);

  double& operator()(std::size_t r, std::size_t c) { return data[r * dim + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * dim + c]; }

  Vector multiply(const Vector& v) const;            // A v
  Vector multiply_transposed(const Vector& v) const; // A^T v
  double spectral_norm() const;
};

struct SyntheticPLConfig {
  std::size_t dim = 4;
  std::size_t clients = 4;
  double mu = 1.0;
  double heterogeneity = 0.0;  // h
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double singular_min = 0.5;   // singular values of the mean coupling matrix
  double singular_max = 1.5;
  double shift_scale = 0.0;    // scale of the mean linear term
  std::uint64_t seed = 0;
};

/// f_i(x, y) = x^T B_i y + c_i^T x - (mu/2) ||y||^2, strongly concave in y with
/// modulus mu. Stochastic gradients add N(0, sigma^2) noise per coordinate.
///
/// With f the client average, Phi(x) = ||Bbar^T x||^2 / (2 mu) + cbar^T x and
/// grad Phi(x) = Bbar Bbar^T x / mu + cbar.
class SyntheticPLProblem final : public MinMaxProblem {
 public:
  SyntheticPLProblem(std::vector<SquareMatrix> couplings, std::vector<Vector> shifts,
                     double mu, double sigma_x = 0.0, double sigma_y = 0.0);

  /// Seeded instance: Bbar = U diag(s) V^T with s spread over
  /// [singular_min, singular_max], B_i = Bbar + h E_i and c_i = cbar + h u_i
  /// where the E_i and u_i are fixed perturbations summing to zero.
  static SyntheticPLProblem generate(const SyntheticPLConfig& cfg);

  std::string_view name() const override { return "synthetic_pl"; }
  std::size_t dim_x() const override { return dim_; }
  std::size_t dim_y() const override { return dim_; }
  std::size_t num_clients() const override { return couplings_.size(); }

  Gradient stochastic_gradient(std::size_t client, const Point& z, RngStream& rng) const override;
  Gradient client_gradient(std::size_t client, const Point& z) const override;
  double client_value(std::size_t client, const Point& z) const override;
  std::optional<PhiValue> analytic_phi(const Vector& x) const override;
  std::optional<double> analytic_smoothness() const override;

  /// argmax_y f(x, y) = Bbar^T x / mu.
  Vector best_response(const Vector& x) const;

  double mu() const noexcept { return mu_; }
  double sigma_x() const noexcept { return sigma_x_; }
  double sigma_y() const noexcept { return sigma_y_; }
  const SquareMatrix& mean_coupling() const noexcept { return mean_coupling_; }
  const Vector& mean_shift() const noexcept { return mean_shift_; }
  const SquareMatrix& coupling(std::size_t i) const { return couplings_.at(i); }
  const Vector& shift(std::size_t i) const { return shifts_.at(i); }

 private:
  std::size_t dim_;
  std::vector<SquareMatrix> couplings_;
  std::vector<Vector> shifts_;
  SquareMatrix mean_coupling_;
  Vector mean_shift_;
  double mu_;
  double sigma_x_;
  double sigma_y_;
};

}  // namespace sagda
