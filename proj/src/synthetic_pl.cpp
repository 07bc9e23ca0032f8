#include "sagda/synthetic_pl.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sagda {

namespace {

Eigen::MatrixXd to_eigen(const SquareMatrix& a) {
  Eigen::MatrixXd m(a.dim, a.dim);
  for (std::size_t r = 0; r < a.dim; ++r)
    for (std::size_t c = 0; c < a.dim; ++c) m(r, c) = a(r, c);
  return m;
}

SquareMatrix from_eigen(const Eigen::MatrixXd& m) {
  SquareMatrix a(static_cast<std::size_t>(m.rows()));
  for (std::size_t r = 0; r < a.dim; ++r)
    for (std::size_t c = 0; c < a.dim; ++c) a(r, c) = m(r, c);
  return a;
}

Eigen::MatrixXd random_orthogonal(std::size_t n, RngStream& rng) {
  Eigen::MatrixXd g(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) g(r, c) = rng.standard_normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

SquareMatrix SquareMatrix::identity(std::size_t n) {
  SquareMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) = 1.0;
  return a;
}

Vector SquareMatrix::multiply(const Vector& v) const {
  if (v.size() != dim) throw DimensionError("SquareMatrix::multiply: dimension mismatch");
  Vector out(dim);
  for (std::size_t r = 0; r < dim; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < dim; ++c) acc += data[r * dim + c] * v[c];
    out[r] = acc;
  }
  return out;
}

Vector SquareMatrix::multiply_transposed(const Vector& v) const {
  if (v.size() != dim) throw DimensionError("SquareMatrix::multiply_transposed: dimension mismatch");
  Vector out(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < dim; ++r) acc += data[r * dim + c] * v[r];
    out[c] = acc;
  }
  return out;
}

double SquareMatrix::spectral_norm() const {
  if (dim == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(*this));
  return svd.singularValues()(0);
}

SyntheticPLProblem::SyntheticPLProblem(std::vector<SquareMatrix> couplings,
                                       std::vector<Vector> shifts, double mu,
                                       double sigma_x, double sigma_y)
    : couplings_(std::move(couplings)),
      shifts_(std::move(shifts)),
      mu_(mu),
      sigma_x_(sigma_x),
      sigma_y_(sigma_y) {
  if (couplings_.empty()) throw std::invalid_argument("synthetic_pl: need at least one client");
  if (couplings_.size() != shifts_.size()) {
    throw std::invalid_argument("synthetic_pl: coupling/shift count mismatch");
  }
  if (!(mu_ > 0.0)) throw std::invalid_argument("synthetic_pl: mu must be positive");
  if (sigma_x_ < 0.0 || sigma_y_ < 0.0) throw std::invalid_argument("synthetic_pl: negative noise level");
  dim_ = couplings_.front().dim;
  for (std::size_t i = 0; i < couplings_.size(); ++i) {
    if (couplings_[i].dim != dim_ || shifts_[i].size() != dim_) {
      throw DimensionError("synthetic_pl: client " + std::to_string(i) + " has inconsistent dimension");
    }
  }
  mean_coupling_ = SquareMatrix(dim_);
  for (const auto& b : couplings_)
    for (std::size_t k = 0; k < b.data.size(); ++k) mean_coupling_.data[k] += b.data[k];
  for (double& v : mean_coupling_.data) v /= static_cast<double>(couplings_.size());
  mean_shift_ = mean_of(shifts_);
}

SyntheticPLProblem SyntheticPLProblem::generate(const SyntheticPLConfig& cfg) {
  if (cfg.dim == 0 || cfg.clients == 0) throw std::invalid_argument("synthetic_pl: dim and clients must be positive");
  if (cfg.heterogeneity < 0.0) throw std::invalid_argument("synthetic_pl: heterogeneity must be >= 0");
  if (!(cfg.singular_min > 0.0) || cfg.singular_max < cfg.singular_min) {
    throw std::invalid_argument("synthetic_pl: need 0 < singular_min <= singular_max");
  }
  const std::size_t d = cfg.dim;
  RngStream rng(cfg.seed, StreamPurpose::problem_build, 0, 0);

  Eigen::VectorXd s(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double t = d == 1 ? 1.0 : static_cast<double>(k) / static_cast<double>(d - 1);
    s(k) = cfg.singular_max + t * (cfg.singular_min - cfg.singular_max);
  }
  const Eigen::MatrixXd u = random_orthogonal(d, rng);
  const Eigen::MatrixXd v = random_orthogonal(d, rng);
  const Eigen::MatrixXd bbar = u * s.asDiagonal() * v.transpose();

  Eigen::VectorXd cbar(d);
  for (std::size_t k = 0; k < d; ++k) cbar(k) = cfg.shift_scale * rng.standard_normal();

  // Zero-sum perturbations: draw, then subtract the client mean.
  const std::size_t M = cfg.clients;
  std::vector<Eigen::MatrixXd> e(M, Eigen::MatrixXd(d, d));
  std::vector<Eigen::VectorXd> w(M, Eigen::VectorXd(d));
  Eigen::MatrixXd e_mean = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd w_mean = Eigen::VectorXd::Zero(d);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) e[i](r, c) = inv_sqrt_d * rng.standard_normal();
    for (std::size_t r = 0; r < d; ++r) w[i](r) = rng.standard_normal();
    e_mean += e[i];
    w_mean += w[i];
  }
  e_mean /= static_cast<double>(M);
  w_mean /= static_cast<double>(M);

  std::vector<SquareMatrix> couplings;
  std::vector<Vector> shifts;
  for (std::size_t i = 0; i < M; ++i) {
    couplings.push_back(from_eigen(bbar + cfg.heterogeneity * (e[i] - e_mean)));
    Vector c(d);
    for (std::size_t r = 0; r < d; ++r) c[r] = cbar(r) + cfg.heterogeneity * (w[i](r) - w_mean(r));
    shifts.push_back(std::move(c));
  }
  return SyntheticPLProblem(std::move(couplings), std::move(shifts), cfg.mu, cfg.sigma_x, cfg.sigma_y);
}

Gradient SyntheticPLProblem::client_gradient(std::size_t client, const Point& z) const {
  check_client(client);
  check_point(z);
  const SquareMatrix& b = couplings_[client];
  Gradient g{add(b.multiply(z.y), shifts_[client]), axpy(-mu_, z.y, b.multiply_transposed(z.x))};
  return g;
}

Gradient SyntheticPLProblem::stochastic_gradient(std::size_t client, const Point& z,
                                                 RngStream& rng) const {
  Gradient g = client_gradient(client, z);
  for (double& v : g.x) v += sigma_x_ * rng.standard_normal();
  for (double& v : g.y) v += sigma_y_ * rng.standard_normal();
  return g;
}

double SyntheticPLProblem::client_value(std::size_t client, const Point& z) const {
  check_client(client);
  check_point(z);
  const SquareMatrix& b = couplings_[client];
  return dot(z.x, b.multiply(z.y)) + dot(shifts_[client], z.x) - 0.5 * mu_ * norm2_sq(z.y);
}

Vector SyntheticPLProblem::best_response(const Vector& x) const {
  return scale(1.0 / mu_, mean_coupling_.multiply_transposed(x));
}

std::optional<PhiValue> SyntheticPLProblem::analytic_phi(const Vector& x) const {
  if (x.size() != dim_) throw DimensionError("synthetic_pl: phi point dimension mismatch");
  const Vector bt_x = mean_coupling_.multiply_transposed(x);
  PhiValue phi;
  phi.value = norm2_sq(bt_x) / (2.0 * mu_) + dot(mean_shift_, x);
  phi.gradient = add(scale(1.0 / mu_, mean_coupling_.multiply(bt_x)), mean_shift_);
  phi.maximizer = scale(1.0 / mu_, bt_x);
  return phi;
}

std::optional<double> SyntheticPLProblem::analytic_smoothness() const {
  // grad f_i is linear with symmetric Jacobian [[0, B_i], [B_i^T, -mu I]]; its
  // eigenvalues are (-mu +- sqrt(mu^2 + 4 s^2)) / 2 over singular values s of B_i.
  double best = 0.0;
  for (const auto& b : couplings_) {
    const double s = b.spectral_norm();
    best = std::max(best, 0.5 * (mu_ + std::sqrt(mu_ * mu_ + 4.0 * s * s)));
  }
  return best;
}

}  // namespace sagda
