#include "sagda/dataset_problems.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sagda {

ClientShards ClientShards::from_partition(const std::vector<Sample>& samples, const Partition& p) {
  ClientShards out;
  if (samples.empty()) throw std::invalid_argument("ClientShards: no samples");
  out.feature_dim = samples.front().features.size();
  out.clients.resize(p.shards.size());
  for (std::size_t c = 0; c < p.shards.size(); ++c) {
    if (p.shards[c].empty()) throw std::invalid_argument("ClientShards: empty shard " + std::to_string(c));
    for (std::size_t idx : p.shards[c]) {
      const Sample& s = samples.at(idx);
      if (s.features.size() != out.feature_dim) throw DimensionError("ClientShards: ragged feature dimension");
      if (s.label != 1.0 && s.label != -1.0) {
        throw std::invalid_argument("ClientShards: label " + std::to_string(s.label) +
                                    " is not +1/-1 (binarize the dataset first)");
      }
      out.clients[c].push_back(s);
    }
  }
  return out;
}

std::size_t ClientShards::total_samples() const {
  std::size_t n = 0;
  for (const auto& c : clients) n += c.size();
  return n;
}

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

// 1 / (1 + exp(t)).
double logistic_tail(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

}  // namespace

// ---------------------------------------------------------------- logistic --

RobustLogRegProblem::RobustLogRegProblem(ClientShards shards, RobustLogRegParams params)
    : shards_(std::move(shards)), params_(params) {
  if (shards_.clients.empty()) throw std::invalid_argument("logreg_robust: no clients");
  n_ = shards_.clients.front().size();
  for (const auto& c : shards_.clients) {
    if (c.size() != n_) throw std::invalid_argument("logreg_robust: all shards must have equal size");
  }
  if (n_ == 0) throw std::invalid_argument("logreg_robust: empty shards");
  lambda1_ = 1.0 / (static_cast<double>(n_) * static_cast<double>(n_));
}

double RobustLogRegProblem::regularizer(const Vector& x) const {
  double acc = 0.0;
  for (double v : x) {
    const double ax2 = params_.alpha * v * v;
    acc += ax2 / (1.0 + ax2);
  }
  return params_.lambda2 * acc;
}

Vector RobustLogRegProblem::regularizer_gradient(const Vector& x) const {
  Vector g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double denom = 1.0 + params_.alpha * x[k] * x[k];
    g[k] = params_.lambda2 * 2.0 * params_.alpha * x[k] / (denom * denom);
  }
  return g;
}

double RobustLogRegProblem::dual_penalty(const Vector& y) const {
  const double nd = static_cast<double>(n_);
  double acc = 0.0;
  for (double v : y) {
    const double r = nd * v - 1.0;
    acc += r * r;
  }
  return 0.5 * lambda1_ * acc;
}

Vector RobustLogRegProblem::dual_penalty_gradient(const Vector& y) const {
  const double nd = static_cast<double>(n_);
  Vector g(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) g[j] = lambda1_ * nd * (nd * y[j] - 1.0);
  return g;
}

double RobustLogRegProblem::loss(std::size_t client, std::size_t sample, const Vector& x) const {
  const Sample& s = shards_.clients[client][sample];
  return softplus(-s.label * dot(s.features, x));
}

Gradient RobustLogRegProblem::sample_gradient(std::size_t client, std::size_t sample,
                                              const Point& z) const {
  check_client(client);
  check_point(z);
  const Sample& s = shards_.clients[client][sample];
  const double margin = s.label * dot(s.features, z.x);
  // d/dx log(1 + exp(-b a^T x)) = -b a / (1 + exp(b a^T x))
  const double coef = -z.y[sample] * s.label * logistic_tail(margin);
  Gradient g{axpy(coef, s.features, regularizer_gradient(z.x)), scale(-1.0, dual_penalty_gradient(z.y))};
  g.y[sample] += softplus(-margin);
  require_finite(g.y, "logreg_robust: sample gradient");
  return g;
}

double RobustLogRegProblem::sample_value(std::size_t client, std::size_t sample, const Point& z) const {
  check_client(client);
  check_point(z);
  return z.y[sample] * loss(client, sample, z.x) - dual_penalty(z.y) + regularizer(z.x);
}

Gradient RobustLogRegProblem::client_gradient(std::size_t client, const Point& z) const {
  check_client(client);
  check_point(z);
  const auto& shard = shards_.clients[client];
  const double inv_n = 1.0 / static_cast<double>(n_);
  Vector gx(dim_x());
  Vector gy = scale(-1.0, dual_penalty_gradient(z.y));
  for (std::size_t j = 0; j < n_; ++j) {
    const Sample& s = shard[j];
    const double margin = s.label * dot(s.features, z.x);
    const double coef = -z.y[j] * s.label * logistic_tail(margin) * inv_n;
    for (std::size_t k = 0; k < gx.size(); ++k) gx[k] += coef * s.features[k];
    gy[j] += softplus(-margin) * inv_n;
  }
  axpy_inplace(1.0, regularizer_gradient(z.x), gx);
  require_finite(gy, "logreg_robust: client gradient");
  return {std::move(gx), std::move(gy)};
}

Vector RobustLogRegProblem::client_gradient_y(std::size_t client, const Point& z) const {
  check_client(client);
  check_point(z);
  const auto& shard = shards_.clients[client];
  const double inv_n = 1.0 / static_cast<double>(n_);
  Vector gy = scale(-1.0, dual_penalty_gradient(z.y));
  for (std::size_t j = 0; j < n_; ++j) {
    gy[j] += softplus(-shard[j].label * dot(shard[j].features, z.x)) * inv_n;
  }
  require_finite(gy, "logreg_robust: client gradient");
  return gy;
}

double RobustLogRegProblem::client_value(std::size_t client, const Point& z) const {
  check_client(client);
  check_point(z);
  double weighted = 0.0;
  for (std::size_t j = 0; j < n_; ++j) weighted += z.y[j] * loss(client, j, z.x);
  return weighted / static_cast<double>(n_) - dual_penalty(z.y) + regularizer(z.x);
}

// --------------------------------------------------------------------- AUC --

AUCProblem::AUCProblem(ClientShards shards) : shards_(std::move(shards)) {
  if (shards_.clients.empty()) throw std::invalid_argument("auc: no clients");
  std::size_t positives = 0;
  for (const auto& c : shards_.clients)
    for (const auto& s : c) positives += s.label > 0.0 ? 1 : 0;
  const std::size_t total = shards_.total_samples();
  tau_ = static_cast<double>(positives) / static_cast<double>(total);
  if (!(tau_ > 0.0 && tau_ < 1.0)) throw std::invalid_argument("auc: need both classes present");
}

std::size_t AUCProblem::shard_size(std::size_t client) const {
  check_client(client);
  return shards_.clients[client].size();
}

// Layout of the min variable: x[0..d) scorer weights, x[d] = c1, x[d+1] = c2.
double AUCProblem::sample_value(std::size_t client, std::size_t sample, const Point& z) const {
  check_client(client);
  check_point(z);
  const Sample& s = shards_.clients[client].at(sample);
  const std::size_t d = shards_.feature_dim;
  double h = 0.0;
  for (std::size_t k = 0; k < d; ++k) h += z.x[k] * s.features[k];
  const double c1 = z.x[d], c2 = z.x[d + 1], lam = z.y[0];
  const double t = tau_;
  double v = -t * (1.0 - t) * lam * lam;
  if (s.label > 0.0) {
    v += (1.0 - t) * (h - c1) * (h - c1) - 2.0 * (1.0 + lam) * (1.0 - t) * h;
  } else {
    v += t * (h - c2) * (h - c2) + 2.0 * (1.0 + lam) * t * h;
  }
  return v;
}

Gradient AUCProblem::sample_gradient(std::size_t client, std::size_t sample, const Point& z) const {
  check_client(client);
  check_point(z);
  const Sample& s = shards_.clients[client].at(sample);
  const std::size_t d = shards_.feature_dim;
  double h = 0.0;
  for (std::size_t k = 0; k < d; ++k) h += z.x[k] * s.features[k];
  const double c1 = z.x[d], c2 = z.x[d + 1], lam = z.y[0];
  const double t = tau_;

  Gradient g{Vector(d + 2), Vector(1)};
  double dh = 0.0;  // d value / d h
  g.y[0] = -2.0 * t * (1.0 - t) * lam;
  if (s.label > 0.0) {
    dh = 2.0 * (1.0 - t) * (h - c1) - 2.0 * (1.0 + lam) * (1.0 - t);
    g.x[d] = -2.0 * (1.0 - t) * (h - c1);
    g.y[0] += -2.0 * (1.0 - t) * h;
  } else {
    dh = 2.0 * t * (h - c2) + 2.0 * (1.0 + lam) * t;
    g.x[d + 1] = -2.0 * t * (h - c2);
    g.y[0] += 2.0 * t * h;
  }
  for (std::size_t k = 0; k < d; ++k) g.x[k] = dh * s.features[k];
  require_finite(g.x, "auc: sample gradient");
  require_finite(g.y, "auc: sample gradient");
  return g;
}

Gradient AUCProblem::client_gradient(std::size_t client, const Point& z) const {
  check_client(client);
  const std::size_t n = shards_.clients[client].size();
  Gradient acc{Vector(dim_x()), Vector(1)};
  for (std::size_t j = 0; j < n; ++j) {
    Gradient g = sample_gradient(client, j, z);
    axpy_inplace(1.0, g.x, acc.x);
    axpy_inplace(1.0, g.y, acc.y);
  }
  const double inv = 1.0 / static_cast<double>(n);
  return {scale(inv, acc.x), scale(inv, acc.y)};
}

double AUCProblem::client_value(std::size_t client, const Point& z) const {
  check_client(client);
  const std::size_t n = shards_.clients[client].size();
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += sample_value(client, j, z);
  return acc / static_cast<double>(n);
}

}  // namespace sagda
