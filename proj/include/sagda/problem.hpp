#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "sagda/linalg.hpp"
#include "sagda/rng.hpp"

namespace sagda {

/// A point z = (x, y) of the min-max problem.
struct Point {
  Vector x;
  Vector y;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Gradient blocks (d/dx, d/dy) at a point.
struct Gradient {
  Vector x;
  Vector y;

  friend bool operator==(const Gradient&, const Gradient&) = default;
};

struct PhiValue {
  double value;
  Vector gradient;
  Vector maximizer;  // argmax_y f(x, y)
};

/// Oracle for f(x, y) = (1/M) sum_i f_i(x, y): min over x, max over y.
///
/// Implementations are immutable after construction. All randomness comes
/// from the caller's RngStream, so concurrent calls with distinct streams are
/// safe.
class MinMaxProblem {
 public:
  virtual ~MinMaxProblem() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t dim_x() const = 0;
  virtual std::size_t dim_y() const = 0;
  virtual std::size_t num_clients() const = 0;

  /// Both gradient blocks of f_i at z on a single stochastic draw. Consumes
  /// exactly one draw from `rng`.
  virtual Gradient stochastic_gradient(std::size_t client, const Point& z,
                                       RngStream& rng) const = 0;

  /// Exact gradient of f_i at z.
  virtual Gradient client_gradient(std::size_t client, const Point& z) const = 0;

  /// Exact d/dy of f_i at z. Default forwards to client_gradient.
  virtual Vector client_gradient_y(std::size_t client, const Point& z) const;

  virtual double client_value(std::size_t client, const Point& z) const = 0;

  /// Closed-form (Phi(x), grad Phi(x)) where one exists.
  virtual std::optional<PhiValue> analytic_phi(const Vector& x) const;

  /// Exact smoothness constant where one is known in closed form.
  virtual std::optional<double> analytic_smoothness() const;

  /// Average of `batch` independent single-draw gradients; batch == 1 returns
  /// the single draw unchanged.
  Gradient minibatch_gradient(std::size_t client, const Point& z, RngStream& rng,
                              std::size_t batch) const;

  /// (1/M) sum_i grad f_i(z), accumulated in client order.
  Gradient full_gradient(const Point& z) const;
  Vector full_gradient_y(const Point& z) const;

  /// f(z) = (1/M) sum_i f_i(z).
  double value(const Point& z) const;

  void check_point(const Point& z) const;
  void check_client(std::size_t client) const;
};

/// A problem whose stochastic draws are uniform picks from a finite local shard.
class FiniteSumProblem : public MinMaxProblem {
 public:
  virtual std::size_t shard_size(std::size_t client) const = 0;
  virtual Gradient sample_gradient(std::size_t client, std::size_t sample,
                                   const Point& z) const = 0;
  virtual double sample_value(std::size_t client, std::size_t sample,
                              const Point& z) const = 0;

  Gradient stochastic_gradient(std::size_t client, const Point& z,
                               RngStream& rng) const override;
};

Vector grad_x_stoch(const MinMaxProblem& p, std::size_t client, const Point& z, RngStream& rng);
Vector grad_y_stoch(const MinMaxProblem& p, std::size_t client, const Point& z, RngStream& rng);

/// Throws if the problem has no closed-form Phi.
PhiValue phi_analytic(const MinMaxProblem& p, const Vector& x);

/// Empirical lower bounds on the smoothness, variance and dissimilarity
/// constants, measured at `sample_budget` random points.
struct EstimatedConstants {
  double smoothness = 0.0;        // L_f
  double variance_x = 0.0;        // sigma_x^2
  double variance_y = 0.0;        // sigma_y^2
  double dissimilarity_x = 0.0;   // sigma_{x,G}^2
  double dissimilarity_y = 0.0;   // sigma_{y,G}^2
};

struct EstimationOptions {
  std::size_t draws_per_point = 16;
  double point_scale = 1.0;
};

EstimatedConstants estimate_constants(const MinMaxProblem& p, std::size_t sample_budget,
                                      RngStream& rng, const EstimationOptions& opts = {});

/// Standard-normal point scaled by `scale`.
Point random_point(const MinMaxProblem& p, RngStream& rng, double scale = 1.0);

}  // namespace sagda
