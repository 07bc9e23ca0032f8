#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sagda/fedcore.hpp"
#include "sagda/problem.hpp"

namespace sagda {

enum class PhiMode { analytic_if_available, inner_ascent };

PhiMode parse_phi_mode(std::string_view name);
std::string_view to_string(PhiMode m);

struct PhiEstimatorConfig {
  std::size_t max_inner_steps = 1000;
  double inner_step = 0.0;  // <= 0 means 0.5 / L_f_hat, resolved per problem
  double tol = 1e-8;        // on ||grad_y f||^2
  PhiMode mode = PhiMode::analytic_if_available;
  std::size_t divergence_patience = 50;

  void validate() const;
};

struct PhiEstimate {
  double phi_grad_sq = 0.0;
  Vector y_star;
  bool converged = false;
  std::size_t inner_steps = 0;
  double residual_sq = 0.0;  // ||grad_y f(x, y_star)||^2
  double phi_value = 0.0;    // f(x, y_star)
  Gradient grad;             // full-batch gradient at (x, y_star)
};

class PhiDivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Smoothness estimate used for the default inner step: analytic when the
/// problem has one, otherwise the empirical lower bound from estimate_constants.
double smoothness_hint(const MinMaxProblem& p, std::uint64_t seed = 0);

/// Copy of cfg with inner_step filled in when it was left at the default.
PhiEstimatorConfig resolve_phi_config(const MinMaxProblem& p, PhiEstimatorConfig cfg,
                                      std::uint64_t seed = 0);

PhiEstimate estimate_phi_grad(const MinMaxProblem& p, const Vector& x, const Vector& y_warm,
                              const PhiEstimatorConfig& cfg);

/// Phi(x) - f(x, y) / 10.
double potential(const MinMaxProblem& p, const Point& z, const PhiEstimatorConfig& cfg);

/// Trailing moving average; entry k averages entries max(0, k-window+1)..k.
std::vector<double> smooth(const std::vector<double>& series, std::size_t window);

enum class ConstraintSet { sagda_i, sagda_ii, fsgda };

ConstraintSet parse_constraint_set(std::string_view name);
std::string_view to_string(ConstraintSet s);

struct ProblemConstants {
  double L_f = 0.0;
  double mu = 0.0;
  std::size_t M = 1;  // only Option I uses M and m
  std::size_t m = 1;
};

struct LearningRates {
  double eta_xl = 0.0;
  double eta_yl = 0.0;
  double eta_xg = 1.0;
  double eta_yg = 1.0;
};

struct Inequality {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool less_equal = true;  // lhs <= rhs, else lhs >= rhs
  bool satisfied = false;
};

struct ConstraintReport {
  ConstraintSet which = ConstraintSet::fsgda;
  std::size_t K = 1;
  double eta_xl = 0.0, eta_yl = 0.0, eta_x = 0.0, eta_y = 0.0;
  double L_f = 0.0, mu = 0.0, L = 0.0;
  std::size_t M = 1, m = 1;
  std::vector<std::pair<std::string, double>> constants;  // a_1.., b_1
  std::vector<Inequality> inequalities;
  bool best_effort = false;  // constants were estimated, not exact

  bool satisfied() const;
  /// Aligned human-readable table.
  std::string table() const;
  /// key=value lines, one per field.
  std::string machine_readable() const;
};

ConstraintReport check_lr_constraints(ConstraintSet which, const ProblemConstants& c,
                                      const LearningRates& r, std::size_t K);

/// Metrics hook for run(): Phi gradient via estimate_phi_grad warm-started at
/// the iterate's y, plus full-batch gradient norms and f at the iterate.
MetricsHook make_metrics_hook(const MinMaxProblem& p, const PhiEstimatorConfig& cfg);

}  // namespace sagda
