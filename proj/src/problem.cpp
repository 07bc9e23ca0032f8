#include "sagda/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace sagda {

Vector MinMaxProblem::client_gradient_y(std::size_t client, const Point& z) const {
  return client_gradient(client, z).y;
}

std::optional<PhiValue> MinMaxProblem::analytic_phi(const Vector&) const { return std::nullopt; }

std::optional<double> MinMaxProblem::analytic_smoothness() const { return std::nullopt; }

void MinMaxProblem::check_point(const Point& z) const {
  if (z.x.size() != dim_x() || z.y.size() != dim_y()) {
    throw DimensionError(std::string(name()) + ": point has dims (" + std::to_string(z.x.size()) +
                         ", " + std::to_string(z.y.size()) + "), expected (" +
                         std::to_string(dim_x()) + ", " + std::to_string(dim_y()) + ")");
  }
}

void MinMaxProblem::check_client(std::size_t client) const {
  if (client >= num_clients()) {
    throw std::out_of_range(std::string(name()) + ": client " + std::to_string(client) +
                            " out of range (M=" + std::to_string(num_clients()) + ")");
  }
}

Gradient MinMaxProblem::minibatch_gradient(std::size_t client, const Point& z, RngStream& rng,
                                           std::size_t batch) const {
  if (batch == 0) throw std::invalid_argument("minibatch_gradient: batch must be >= 1");
  if (batch == 1) return stochastic_gradient(client, z, rng);
  Gradient acc{Vector(dim_x()), Vector(dim_y())};
  for (std::size_t b = 0; b < batch; ++b) {
    Gradient g = stochastic_gradient(client, z, rng);
    axpy_inplace(1.0, g.x, acc.x);
    axpy_inplace(1.0, g.y, acc.y);
  }
  const double inv = 1.0 / static_cast<double>(batch);
  return {scale(inv, acc.x), scale(inv, acc.y)};
}

Gradient MinMaxProblem::full_gradient(const Point& z) const {
  check_point(z);
  std::vector<Vector> gx, gy;
  gx.reserve(num_clients());
  gy.reserve(num_clients());
  for (std::size_t i = 0; i < num_clients(); ++i) {
    Gradient g = client_gradient(i, z);
    gx.push_back(std::move(g.x));
    gy.push_back(std::move(g.y));
  }
  return {mean_of(gx), mean_of(gy)};
}

Vector MinMaxProblem::full_gradient_y(const Point& z) const {
  check_point(z);
  std::vector<Vector> gy;
  gy.reserve(num_clients());
  for (std::size_t i = 0; i < num_clients(); ++i) gy.push_back(client_gradient_y(i, z));
  return mean_of(gy);
}

double MinMaxProblem::value(const Point& z) const {
  check_point(z);
  double acc = 0.0;
  for (std::size_t i = 0; i < num_clients(); ++i) acc += client_value(i, z);
  return acc / static_cast<double>(num_clients());
}

Gradient FiniteSumProblem::stochastic_gradient(std::size_t client, const Point& z,
                                               RngStream& rng) const {
  check_client(client);
  const std::size_t n = shard_size(client);
  if (n == 0) throw std::invalid_argument(std::string(name()) + ": empty shard");
  return sample_gradient(client, rng.uniform_index(n), z);
}

Vector grad_x_stoch(const MinMaxProblem& p, std::size_t client, const Point& z, RngStream& rng) {
  p.check_point(z);
  return p.stochastic_gradient(client, z, rng).x;
}

Vector grad_y_stoch(const MinMaxProblem& p, std::size_t client, const Point& z, RngStream& rng) {
  p.check_point(z);
  return p.stochastic_gradient(client, z, rng).y;
}

PhiValue phi_analytic(const MinMaxProblem& p, const Vector& x) {
  auto phi = p.analytic_phi(x);
  if (!phi) {
    throw std::invalid_argument(std::string(p.name()) + ": no closed-form Phi for this problem");
  }
  return std::move(*phi);
}

Point random_point(const MinMaxProblem& p, RngStream& rng, double scale) {
  Point z{Vector(p.dim_x()), Vector(p.dim_y())};
  for (double& v : z.x) v = scale * rng.standard_normal();
  for (double& v : z.y) v = scale * rng.standard_normal();
  return z;
}

namespace {

double joint_sq_distance(const Point& a, const Point& b) {
  return norm2_sq(sub(a.x, b.x)) + norm2_sq(sub(a.y, b.y));
}

double joint_sq_gap(const Gradient& a, const Gradient& b) {
  return norm2_sq(sub(a.x, b.x)) + norm2_sq(sub(a.y, b.y));
}

}  // namespace

EstimatedConstants estimate_constants(const MinMaxProblem& p, std::size_t sample_budget,
                                      RngStream& rng, const EstimationOptions& opts) {
  if (sample_budget < 2) throw std::invalid_argument("estimate_constants: sample_budget must be >= 2");
  if (opts.draws_per_point == 0) throw std::invalid_argument("estimate_constants: draws_per_point must be >= 1");

  EstimatedConstants out;
  std::vector<Point> points;
  points.reserve(sample_budget);
  for (std::size_t s = 0; s < sample_budget; ++s) points.push_back(random_point(p, rng, opts.point_scale));

  const std::size_t M = p.num_clients();
  std::vector<std::vector<Gradient>> exact(points.size());
  for (std::size_t s = 0; s < points.size(); ++s) {
    exact[s].reserve(M);
    for (std::size_t i = 0; i < M; ++i) exact[s].push_back(p.client_gradient(i, points[s]));
  }

  for (std::size_t s = 0; s + 1 < points.size(); s += 2) {
    const double dist = std::sqrt(joint_sq_distance(points[s], points[s + 1]));
    if (dist == 0.0) continue;
    for (std::size_t i = 0; i < M; ++i) {
      const double ratio = std::sqrt(joint_sq_gap(exact[s][i], exact[s + 1][i])) / dist;
      out.smoothness = std::max(out.smoothness, ratio);
    }
  }

  for (std::size_t s = 0; s < points.size(); ++s) {
    std::vector<Vector> gx, gy;
    for (std::size_t i = 0; i < M; ++i) {
      gx.push_back(exact[s][i].x);
      gy.push_back(exact[s][i].y);
    }
    const Vector mean_x = mean_of(gx);
    const Vector mean_y = mean_of(gy);
    for (std::size_t i = 0; i < M; ++i) {
      out.dissimilarity_x = std::max(out.dissimilarity_x, norm2_sq(sub(exact[s][i].x, mean_x)));
      out.dissimilarity_y = std::max(out.dissimilarity_y, norm2_sq(sub(exact[s][i].y, mean_y)));

      double vx = 0.0, vy = 0.0;
      for (std::size_t k = 0; k < opts.draws_per_point; ++k) {
        Gradient g = p.stochastic_gradient(i, points[s], rng);
        vx += norm2_sq(sub(g.x, exact[s][i].x));
        vy += norm2_sq(sub(g.y, exact[s][i].y));
      }
      out.variance_x = std::max(out.variance_x, vx / static_cast<double>(opts.draws_per_point));
      out.variance_y = std::max(out.variance_y, vy / static_cast<double>(opts.draws_per_point));
    }
  }
  return out;
}

}  // namespace sagda
