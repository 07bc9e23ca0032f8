#include "sagda/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sagda {

PhiMode parse_phi_mode(std::string_view name) {
  if (name == "analytic_if_available" || name == "analytic") return PhiMode::analytic_if_available;
  if (name == "inner_ascent") return PhiMode::inner_ascent;
  throw std::invalid_argument("unknown phi mode '" + std::string(name) + "'");
}

std::string_view to_string(PhiMode m) {
  return m == PhiMode::analytic_if_available ? "analytic_if_available" : "inner_ascent";
}

void PhiEstimatorConfig::validate() const {
  if (max_inner_steps < 1) throw std::invalid_argument("phi: max_inner_steps must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("phi: tol must be > 0");
  if (!(inner_step > 0.0) || !std::isfinite(inner_step)) {
    throw std::invalid_argument("phi: inner_step must be > 0 (resolve it first)");
  }
  if (divergence_patience < 1) throw std::invalid_argument("phi: divergence_patience must be >= 1");
}

double smoothness_hint(const MinMaxProblem& p, std::uint64_t seed) {
  if (auto l = p.analytic_smoothness()) return *l;
  RngStream rng(seed, StreamPurpose::estimation, 0, 0);
  const EstimatedConstants c = estimate_constants(p, 8, rng);
  if (!(c.smoothness > 0.0)) throw std::runtime_error("phi: smoothness estimate is zero");
  return c.smoothness;
}

PhiEstimatorConfig resolve_phi_config(const MinMaxProblem& p, PhiEstimatorConfig cfg,
                                      std::uint64_t seed) {
  if (!(cfg.inner_step > 0.0)) cfg.inner_step = 0.5 / smoothness_hint(p, seed);
  cfg.validate();
  return cfg;
}

PhiEstimate estimate_phi_grad(const MinMaxProblem& p, const Vector& x, const Vector& y_warm,
                              const PhiEstimatorConfig& cfg) {
  if (x.size() != p.dim_x() || y_warm.size() != p.dim_y()) {
    throw DimensionError("estimate_phi_grad: point dimension mismatch");
  }
  cfg.validate();
  require_finite(x, "estimate_phi_grad: x");
  require_finite(y_warm, "estimate_phi_grad: y_warm");

  PhiEstimate out;
  if (cfg.mode == PhiMode::analytic_if_available) {
    if (auto phi = p.analytic_phi(x)) {
      out.phi_grad_sq = norm2_sq(phi->gradient);
      out.y_star = phi->maximizer;
      out.converged = true;
      out.phi_value = phi->value;
      out.grad = p.full_gradient({x, out.y_star});
      out.residual_sq = norm2_sq(out.grad.y);
      // Report the closed form, not the gradient at the computed maximizer.
      out.grad.x = phi->gradient;
      return out;
    }
  }

  Point z{x, y_warm};
  Vector gy = p.full_gradient_y(z);
  double res = norm2_sq(gy);
  double prev = res;
  std::size_t growth = 0;
  std::size_t steps = 0;
  while (res > cfg.tol && steps < cfg.max_inner_steps) {
    axpy_inplace(cfg.inner_step, gy, z.y);
    gy = p.full_gradient_y(z);
    res = norm2_sq(gy);
    ++steps;
    if (!std::isfinite(res)) throw PhiDivergenceError("phi inner ascent: non-finite gradient");
    growth = res > prev ? growth + 1 : 0;
    if (growth >= cfg.divergence_patience) {
      throw PhiDivergenceError("phi inner ascent: gradient norm grew for " + std::to_string(growth) +
                               " consecutive steps");
    }
    prev = res;
  }
  out.inner_steps = steps;
  out.converged = res <= cfg.tol;
  out.residual_sq = res;
  out.grad = p.full_gradient(z);
  out.phi_grad_sq = norm2_sq(out.grad.x);
  out.phi_value = p.value(z);
  out.y_star = std::move(z.y);
  return out;
}

double potential(const MinMaxProblem& p, const Point& z, const PhiEstimatorConfig& cfg) {
  p.check_point(z);
  const PhiEstimate e = estimate_phi_grad(p, z.x, z.y, cfg);
  return e.phi_value - p.value(z) / 10.0;
}

std::vector<double> smooth(const std::vector<double>& series, std::size_t window) {
  if (window < 1) throw std::invalid_argument("smooth: window must be >= 1");
  std::vector<double> out(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    const std::size_t lo = k + 1 >= window ? k + 1 - window : 0;
    double acc = 0.0;
    for (std::size_t j = lo; j <= k; ++j) acc += series[j];
    out[k] = acc / static_cast<double>(k - lo + 1);
  }
  return out;
}

// ------------------------------------------------------------ constraints --

ConstraintSet parse_constraint_set(std::string_view name) {
  if (name == "sagda_i") return ConstraintSet::sagda_i;
  if (name == "sagda_ii") return ConstraintSet::sagda_ii;
  if (name == "fsgda") return ConstraintSet::fsgda;
  throw std::invalid_argument("unknown constraint set '" + std::string(name) +
                              "' (expected sagda_i, sagda_ii or fsgda)");
}

std::string_view to_string(ConstraintSet s) {
  switch (s) {
    case ConstraintSet::sagda_i: return "sagda_i";
    case ConstraintSet::sagda_ii: return "sagda_ii";
    case ConstraintSet::fsgda: return "fsgda";
  }
  return "?";
}

bool ConstraintReport::satisfied() const {
  return std::all_of(inequalities.begin(), inequalities.end(),
                     [](const Inequality& q) { return q.satisfied; });
}

namespace {

// a / b with 0/0 read as 0 (both rates zero in the degenerate probe).
double ratio(double a, double b) {
  if (b == 0.0) return a == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return a / b;
}

Inequality make_leq(std::string name, double lhs, double rhs) {
  return {std::move(name), lhs, rhs, true, lhs <= rhs};
}

Inequality make_geq(std::string name, double lhs, double rhs) {
  return {std::move(name), lhs, rhs, false, lhs >= rhs};
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace

ConstraintReport check_lr_constraints(ConstraintSet which, const ProblemConstants& c,
                                      const LearningRates& r, std::size_t K) {
  if (!(c.L_f > 0.0) || !(c.mu > 0.0)) throw std::invalid_argument("check_lr: L_f and mu must be > 0");
  if (K < 1) throw std::invalid_argument("check_lr: K must be >= 1");
  if (r.eta_xl < 0.0 || r.eta_yl < 0.0 || !(r.eta_xg > 0.0) || !(r.eta_yg > 0.0)) {
    throw std::invalid_argument("check_lr: local rates must be >= 0 and global rates > 0");
  }
  if (!std::isfinite(c.L_f) || !std::isfinite(c.mu) || !std::isfinite(r.eta_xl) ||
      !std::isfinite(r.eta_yl) || !std::isfinite(r.eta_xg) || !std::isfinite(r.eta_yg)) {
    throw std::invalid_argument("check_lr: non-finite input");
  }
  if (which == ConstraintSet::sagda_i && (c.m < 1 || c.m > c.M)) {
    throw std::invalid_argument("check_lr: need 1 <= m <= M");
  }

  ConstraintReport rep;
  rep.which = which;
  rep.K = K;
  rep.eta_xl = r.eta_xl;
  rep.eta_yl = r.eta_yl;
  rep.eta_x = r.eta_xl * r.eta_xg;
  rep.eta_y = r.eta_yl * r.eta_yg;
  rep.L_f = c.L_f;
  rep.mu = c.mu;
  rep.L = c.L_f + c.L_f * c.L_f / c.mu;
  rep.M = c.M;
  rep.m = c.m;

  const double Kd = static_cast<double>(K);
  const double Lf = c.L_f, Lf2 = Lf * Lf, L = rep.L, mu2 = c.mu * c.mu;
  const double ex = rep.eta_x, ey = rep.eta_y;
  const double exl2 = r.eta_xl * r.eta_xl, eyl2 = r.eta_yl * r.eta_yl;
  const double K2 = Kd * Kd;
  const double rxy = ratio(ex, ey), ryx = ratio(ey, ex);

  rep.inequalities.push_back(make_leq("local_smoothness",
                                      8.0 * Kd * (Kd - 1.0) * (2.0 * Kd - 1.0) * Lf2 * std::max(exl2, eyl2),
                                      1.0));

  switch (which) {
    case ConstraintSet::sagda_i: {
      const double Mm = static_cast<double>(c.M) / static_cast<double>(c.m);
      const double a1 = Kd * Lf2 * (31.0 / 20.0 * ex + 1.0 / 20.0 * ey);
      const double a2 = 0.5 * (L + Lf / 10.0) + 1.0 + Mm * Mm - Mm;
      rep.constants = {{"a_1", a1}, {"a_2", a2}};
      const double q = 4.0 * Lf2 * K2 * (ex * ex + ey * ey);
      const double common = a1 + a2 * q;
      rep.inequalities.push_back(make_geq(
          "option1_c2", 0.5 - a2 * q - common * 160.0 * K2 * (exl2 + eyl2) * Lf2, 0.0));
      rep.inequalities.push_back(make_geq(
          "option1_x", (ex * Kd / 10.0 - 4.0 * a2 * K2 * ex * ex) - common * 40.0 * K2 * exl2, 0.0));
      rep.inequalities.push_back(make_geq(
          "option1_y",
          (ey * Kd * (1.0 / 20.0 - rxy * Lf2 / mu2) - 4.0 * a2 * K2 * ey * ey) - common * 40.0 * K2 * eyl2,
          0.0));
      break;
    }
    case ConstraintSet::sagda_ii: {
      const double b1 = Lf2 * (31.0 / 20.0 * ex * Kd + 1.0 / 20.0 * ey * Kd +
                               2.0 * (L + Lf / 10.0) * ex * ex * K2 + 1.0 / 5.0 * Lf * ey * ey * K2);
      rep.constants = {{"b_1", b1}};
      rep.inequalities.push_back(make_geq(
          "option2_x", ex * Kd / 10.0 - (2.0 * (L + Lf / 10.0) * ex * ex * K2 + 40.0 * K2 * exl2 * b1), 0.0));
      rep.inequalities.push_back(make_geq(
          "option2_y",
          ey * Kd * (1.0 / 20.0 - rxy * Lf2 / mu2) - (1.0 / 5.0 * Lf * ey * ey * K2 + 40.0 * K2 * eyl2 * b1),
          0.0));
      break;
    }
    case ConstraintSet::fsgda: {
      const double a1 = 1.0 / 10.0 - 2.0 * (2.0 * L + Lf / 5.0) * ex * Kd;
      const double a2 = 1.0 / 20.0 - 2.0 / 5.0 * Lf * ey * Kd - rxy * Lf2 / mu2;
      const double a3 = 31.0 / 20.0 + (2.0 * L + Lf / 5.0) * ex * Kd;
      const double a4 = 1.0 / 20.0 + 1.0 / 5.0 * Lf * ey * Kd;
      rep.constants = {{"a_1", a1}, {"a_2", a2}, {"a_3", a3}, {"a_4", a4}};
      rep.inequalities.push_back(make_geq(
          "fsgda_x", a1 - a3 * 40.0 * Lf2 * K2 * exl2 - ryx * a4 * 40.0 * Lf2 * K2 * exl2, 0.0));
      rep.inequalities.push_back(make_geq(
          "fsgda_y", a2 - a3 * rxy * 40.0 * Lf2 * K2 * eyl2 - a4 * 40.0 * Lf2 * K2 * eyl2, 0.0));
      break;
    }
  }
  return rep;
}

std::string ConstraintReport::table() const {
  std::ostringstream os;
  os << "constraint set: " << to_string(which) << (best_effort ? " (best-effort: estimated constants)" : "")
     << "\n";
  os << "K=" << K << " eta_xl=" << fmt(eta_xl) << " eta_yl=" << fmt(eta_yl) << " eta_x=" << fmt(eta_x)
     << " eta_y=" << fmt(eta_y) << "\n";
  os << "L_f=" << fmt(L_f) << " mu=" << fmt(mu) << " L=" << fmt(L);
  if (which == ConstraintSet::sagda_i) os << " M=" << M << " m=" << m;
  os << "\n";
  for (const auto& [k, v] : constants) os << k << "=" << fmt(v) << " ";
  if (!constants.empty()) os << "\n";
  std::size_t w = 4;
  for (const auto& q : inequalities) w = std::max(w, q.name.size());
  os << std::left << std::setw(static_cast<int>(w)) << "name" << "  " << std::setw(24) << "lhs" << "  "
     << std::setw(3) << "op" << "  " << std::setw(8) << "rhs" << "  ok\n";
  for (const auto& q : inequalities) {
    os << std::left << std::setw(static_cast<int>(w)) << q.name << "  " << std::setw(24) << fmt(q.lhs)
       << "  " << std::setw(3) << (q.less_equal ? "<=" : ">=") << "  " << std::setw(8) << fmt(q.rhs) << "  "
       << (q.satisfied ? "yes" : "NO") << "\n";
  }
  os << "all satisfied: " << (satisfied() ? "yes" : "no") << "\n";
  return os.str();
}

std::string ConstraintReport::machine_readable() const {
  std::ostringstream os;
  os << "which=" << to_string(which) << "\n"
     << "best_effort=" << (best_effort ? 1 : 0) << "\n"
     << "K=" << K << "\n"
     << "eta_xl=" << fmt(eta_xl) << "\n"
     << "eta_yl=" << fmt(eta_yl) << "\n"
     << "eta_x=" << fmt(eta_x) << "\n"
     << "eta_y=" << fmt(eta_y) << "\n"
     << "L_f=" << fmt(L_f) << "\n"
     << "mu=" << fmt(mu) << "\n"
     << "L=" << fmt(L) << "\n"
     << "M=" << M << "\n"
     << "m=" << m << "\n";
  for (const auto& [k, v] : constants) os << k << "=" << fmt(v) << "\n";
  for (const auto& q : inequalities) {
    os << q.name << ".lhs=" << fmt(q.lhs) << "\n"
       << q.name << ".rhs=" << fmt(q.rhs) << "\n"
       << q.name << ".op=" << (q.less_equal ? "<=" : ">=") << "\n"
       << q.name << ".satisfied=" << (q.satisfied ? 1 : 0) << "\n";
  }
  os << "satisfied=" << (satisfied() ? 1 : 0) << "\n";
  return os.str();
}

MetricsHook make_metrics_hook(const MinMaxProblem& p, const PhiEstimatorConfig& cfg) {
  cfg.validate();
  return [&p, cfg](const Point& z) {
    RoundMetrics m;
    m.evaluated = true;
    const Gradient g = p.full_gradient(z);
    m.grad_norm_x_sq = norm2_sq(g.x);
    m.grad_norm_y_sq = norm2_sq(g.y);
    m.f_value = p.value(z);
    const PhiEstimate e = estimate_phi_grad(p, z.x, z.y, cfg);
    m.grad_norm_phi_sq = e.phi_grad_sq;
    m.phi_converged = e.converged;
    return m;
  };
}

}  // namespace sagda
