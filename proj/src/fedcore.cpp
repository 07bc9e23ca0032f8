#include "sagda/fedcore.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

namespace sagda {

Algorithm parse_algorithm(std::string_view name) {
  if (name == "sagda_i") return Algorithm::sagda_i;
  if (name == "sagda_ii") return Algorithm::sagda_ii;
  if (name == "fsgda") return Algorithm::fsgda;
  if (name == "parallel_sgda") return Algorithm::parallel_sgda;
  if (name == "cd_ma") return Algorithm::cd_ma;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::sagda_i: return "sagda_i";
    case Algorithm::sagda_ii: return "sagda_ii";
    case Algorithm::fsgda: return "fsgda";
    case Algorithm::parallel_sgda: return "parallel_sgda";
    case Algorithm::cd_ma: return "cd_ma";
  }
  return "unknown";
}

AlgoConfig AlgoConfig::resolved() const {
  AlgoConfig c = *this;
  if (c.algorithm == Algorithm::parallel_sgda) {
    c.K = 1;
    c.m = c.M;
    c.eta_xg = 1.0;
    c.eta_yg = 1.0;
  } else if (c.algorithm == Algorithm::cd_ma) {
    c.eta_xg = 1.0;
    c.eta_yg = 1.0;
  }
  return c;
}

void AlgoConfig::validate() const {
  auto fail = [](const std::string& why) { throw std::invalid_argument("invalid config: " + why); };
  if (!(eta_xl >= 0.0) || !(eta_yl >= 0.0)) fail("local learning rates must be >= 0");
  if (!(eta_xg > 0.0) || !(eta_yg > 0.0)) fail("global learning rates must be > 0");
  if (K < 1) fail("K must be >= 1");
  if (M < 1) fail("M must be >= 1");
  if (m < 1 || m > M) fail("m must satisfy 1 <= m <= M (m=" + std::to_string(m) + ", M=" + std::to_string(M) + ")");
  if (batch < 1) fail("batch must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
  if (!(divergence_bound > 0.0)) fail("divergence bound must be positive");
}

void AlgoConfig::validate(const MinMaxProblem& p) const {
  validate();
  if (p.num_clients() != M) {
    throw std::invalid_argument("invalid config: M=" + std::to_string(M) + " but problem has " +
                                std::to_string(p.num_clients()) + " clients");
  }
}

double RoundRecord::mean_samples_per_client() const {
  if (cumulative_samples_per_client.empty()) return 0.0;
  const double total = static_cast<double>(std::accumulate(
      cumulative_samples_per_client.begin(), cumulative_samples_per_client.end(), std::uint64_t{0}));
  return total / static_cast<double>(cumulative_samples_per_client.size());
}

std::vector<std::size_t> sample_clients(std::size_t M, std::size_t m, RngStream& rng) {
  if (m < 1 || m > M) {
    throw std::invalid_argument("sample_clients: need 1 <= m <= M (m=" + std::to_string(m) +
                                ", M=" + std::to_string(M) + ")");
  }
  return sample_without_replacement(M, m, rng);
}

namespace {

void guard(const Point& z, const AlgoConfig& cfg, std::size_t client, std::size_t k) {
  auto check = [&](const Vector& v) {
    for (double e : v) {
      if (!std::isfinite(e) || std::fabs(e) > cfg.divergence_bound) {
        const std::string where = client == std::numeric_limits<std::size_t>::max()
                                      ? std::string("server aggregate")
                                      : "client " + std::to_string(client) + ", local step " + std::to_string(k);
        throw DivergenceError("diverged at " + where + " (coordinate " + std::to_string(e) + ")");
      }
    }
  };
  check(z.x);
  check(z.y);
}

template <typename Direction>
Point local_loop(const MinMaxProblem& p, std::size_t client, const Point& z_t, const AlgoConfig& cfg,
                 RngStream& rng, const LocalStepObserver& observer, Direction&& direction) {
  Point z = z_t;
  for (std::size_t k = 0; k < cfg.K; ++k) {
    Gradient dir;
    try {
      // Both blocks at the same z^k on the same draw.
      dir = direction(p.minibatch_gradient(client, z, rng, cfg.batch));
    } catch (const NonFiniteError& e) {
      throw DivergenceError("diverged at client " + std::to_string(client) + ", local step " +
                            std::to_string(k) + ": " + e.what());
    }
    if (observer) observer(client, k, dir);
    for (std::size_t j = 0; j < z.x.size(); ++j) z.x[j] = z.x[j] - cfg.eta_xl * dir.x[j];
    for (std::size_t j = 0; j < z.y.size(); ++j) z.y[j] = z.y[j] + cfg.eta_yl * dir.y[j];
    guard(z, cfg, client, k);
  }
  return z;
}

Gradient zero_gradient(const MinMaxProblem& p) { return {Vector(p.dim_x()), Vector(p.dim_y())}; }

/// Runs fn(slot) for every slot, in parallel when threads > 1. Exceptions are
/// rethrown in slot order.
template <typename Fn>
void for_each_participant(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t s = 0; s < count; ++s) fn(s);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  const std::size_t workers = std::min(threads, count);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t s = w; s < count; s += workers) {
          try {
            fn(s);
          } catch (...) {
            errors[s] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

RoundRecord make_record(const ServerState& server, const std::vector<ClientState>& clients,
                        std::vector<std::size_t> participants) {
  RoundRecord rec;
  rec.t = server.round;
  rec.participants = std::move(participants);
  rec.comm_sessions = server.comm_sessions;
  rec.cumulative_samples_per_client.reserve(clients.size());
  for (const auto& c : clients) rec.cumulative_samples_per_client.push_back(c.samples);
  return rec;
}

void check_state(const ServerState& server, const std::vector<ClientState>& clients,
                 const MinMaxProblem& p, const AlgoConfig& cfg) {
  cfg.validate(p);
  p.check_point(server.z);
  if (clients.size() != cfg.M) throw std::invalid_argument("client state count does not match M");
  if (server.vbar.x.size() != p.dim_x() || server.vbar.y.size() != p.dim_y()) {
    throw DimensionError("server control variates have the wrong dimension");
  }
}

std::vector<std::size_t> draw_participants(const ServerState& server, const AlgoConfig& cfg) {
  RngStream rng(cfg.seed, StreamPurpose::sampling, 0, server.round);
  return sample_clients(cfg.M, cfg.m, rng);
}

std::string context(const AlgoConfig& cfg, std::uint64_t round) {
  return std::string(to_string(cfg.algorithm)) + ", round " + std::to_string(round) + ": ";
}

/// Shared tail of every round: aggregate, advance counters, emit the record.
RoundRecord finish_round(ServerState& server, std::vector<ClientState>& clients,
                         std::vector<std::size_t> participants, const std::vector<Point>& returns,
                         const AlgoConfig& cfg, std::uint64_t sessions) {
  server.z = server_aggregate(server.z, returns, cfg);
  guard(server.z, cfg, std::numeric_limits<std::size_t>::max(), cfg.K);
  server.comm_sessions += sessions;
  server.last_participants = participants;
  RoundRecord rec = make_record(server, clients, std::move(participants));
  ++server.round;
  return rec;
}

RoundRecord plain_round(ServerState& server, std::vector<ClientState>& clients, const MinMaxProblem& p,
                        const AlgoConfig& cfg, const LocalStepObserver& observer) {
  check_state(server, clients, p, cfg);
  auto participants = draw_participants(server, cfg);
  std::vector<Point> returns(participants.size());
  try {
    for_each_participant(participants.size(), cfg.threads, [&](std::size_t s) {
      const std::size_t i = participants[s];
      RngStream rng(cfg.seed, StreamPurpose::local_steps, i, server.round);
      returns[s] = local_sgda_steps(p, i, server.z, cfg, rng, observer);
      clients[i].samples += cfg.K * cfg.batch;
    });
    return finish_round(server, clients, std::move(participants), returns, cfg, 1);
  } catch (const DivergenceError& e) {
    throw DivergenceError(context(cfg, server.round) + e.what());
  }
}

}  // namespace

Point local_sagda_steps(const MinMaxProblem& p, std::size_t client, const Point& z_t,
                        const Gradient& v_i, const Gradient& vbar, const AlgoConfig& cfg,
                        RngStream& rng, const LocalStepObserver& observer) {
  p.check_point(z_t);
  if (v_i.x.size() != p.dim_x() || v_i.y.size() != p.dim_y() || vbar.x.size() != p.dim_x() ||
      vbar.y.size() != p.dim_y()) {
    throw DimensionError("local_sagda_steps: control variate dimension mismatch");
  }
  if (cfg.K < 1) throw std::invalid_argument("local_sagda_steps: K must be >= 1");
  return local_loop(p, client, z_t, cfg, rng, observer, [&](Gradient g) {
    for (std::size_t j = 0; j < g.x.size(); ++j) g.x[j] = g.x[j] - v_i.x[j] + vbar.x[j];
    for (std::size_t j = 0; j < g.y.size(); ++j) g.y[j] = g.y[j] - v_i.y[j] + vbar.y[j];
    require_finite(g.x, "local_sagda_steps");
    require_finite(g.y, "local_sagda_steps");
    return g;
  });
}

Point local_sgda_steps(const MinMaxProblem& p, std::size_t client, const Point& z_t,
                       const AlgoConfig& cfg, RngStream& rng, const LocalStepObserver& observer) {
  p.check_point(z_t);
  if (cfg.K < 1) throw std::invalid_argument("local_sgda_steps: K must be >= 1");
  return local_loop(p, client, z_t, cfg, rng, observer, [](Gradient g) { return g; });
}

Point server_aggregate(const Point& z_t, std::span<const Point> returns, const AlgoConfig& cfg) {
  if (returns.size() != cfg.m) {
    throw std::invalid_argument("server_aggregate: expected " + std::to_string(cfg.m) +
                                " returns, got " + std::to_string(returns.size()));
  }
  Vector sum_x(z_t.x.size()), sum_y(z_t.y.size());
  for (const Point& r : returns) {
    require_same_size(r.x, z_t.x, "server_aggregate");
    require_same_size(r.y, z_t.y, "server_aggregate");
    for (std::size_t j = 0; j < sum_x.size(); ++j) sum_x[j] += r.x[j];
    for (std::size_t j = 0; j < sum_y.size(); ++j) sum_y[j] += r.y[j];
  }
  const double inv_m = 1.0 / static_cast<double>(returns.size());
  Point next{Vector(z_t.x.size()), Vector(z_t.y.size())};
  for (std::size_t j = 0; j < sum_x.size(); ++j)
    next.x[j] = z_t.x[j] + cfg.eta_xg * (sum_x[j] * inv_m - z_t.x[j]);
  for (std::size_t j = 0; j < sum_y.size(); ++j)
    next.y[j] = z_t.y[j] + cfg.eta_yg * (sum_y[j] * inv_m - z_t.y[j]);
  return next;
}

void initialize_option1(ServerState& server, std::vector<ClientState>& clients,
                        const MinMaxProblem& p, const AlgoConfig& cfg) {
  std::vector<Vector> vx, vy;
  for (auto& c : clients) {
    RngStream rng(cfg.seed, StreamPurpose::variate_init, c.id, 0);
    c.v = p.stochastic_gradient(c.id, server.z, rng);
    c.anchor_round = -2;
    c.samples += 1;
    vx.push_back(c.v.x);
    vy.push_back(c.v.y);
  }
  server.vbar = {mean_of(vx), mean_of(vy)};
  server.pending_deltas.clear();
}

RoundRecord option1_round(ServerState& server, std::vector<ClientState>& clients,
                          const MinMaxProblem& p, const AlgoConfig& cfg,
                          const LocalStepObserver& observer) {
  check_state(server, clients, p, cfg);
  const bool active = cfg.control_variates == ControlVariates::active;
  if (active) {
    for (const auto& c : clients) {
      if (c.anchor_round == -1) {
        throw std::logic_error("option1_round: client " + std::to_string(c.id) +
                               " control variates not initialized");
      }
    }
  }

  // (a) fold last round's deltas into vbar with the 1/M scaling.
  if (active && !server.pending_deltas.empty()) {
    Vector sx(p.dim_x()), sy(p.dim_y());
    for (const Gradient& d : server.pending_deltas) {
      axpy_inplace(1.0, d.x, sx);
      axpy_inplace(1.0, d.y, sy);
    }
    const double inv_M = 1.0 / static_cast<double>(cfg.M);
    server.vbar.x = axpy(inv_M, sx, server.vbar.x);
    server.vbar.y = axpy(inv_M, sy, server.vbar.y);
  }
  server.pending_deltas.clear();

  // (b) sample, (c) local work and variate refresh.
  auto participants = draw_participants(server, cfg);
  const Gradient zero = zero_gradient(p);
  std::vector<Point> returns(participants.size());
  std::vector<Gradient> deltas(participants.size());
  try {
    for_each_participant(participants.size(), cfg.threads, [&](std::size_t s) {
      ClientState& c = clients[participants[s]];
      RngStream rng(cfg.seed, StreamPurpose::local_steps, c.id, server.round);
      if (!active) {
        returns[s] = local_sagda_steps(p, c.id, server.z, zero, zero, cfg, rng, observer);
        c.samples += cfg.K * cfg.batch;
        return;
      }
      returns[s] = local_sagda_steps(p, c.id, server.z, c.v, server.vbar, cfg, rng, observer);
      RngStream fresh(cfg.seed, StreamPurpose::variate_refresh, c.id, server.round);
      Gradient v_new = p.stochastic_gradient(c.id, server.z, fresh);
      deltas[s] = {sub(v_new.x, c.v.x), sub(v_new.y, c.v.y)};
      c.v = std::move(v_new);
      c.anchor_round = static_cast<std::int64_t>(server.round);
      c.samples += cfg.K * cfg.batch + 1;
    });
  } catch (const DivergenceError& e) {
    throw DivergenceError(context(cfg, server.round) + e.what());
  }
  // (d) buffer deltas for the next round.
  if (active) server.pending_deltas = std::move(deltas);
  // (e) aggregate.
  return finish_round(server, clients, std::move(participants), returns, cfg, 1);
}

RoundRecord option2_round(ServerState& server, std::vector<ClientState>& clients,
                          const MinMaxProblem& p, const AlgoConfig& cfg,
                          const LocalStepObserver& observer) {
  check_state(server, clients, p, cfg);
  const bool active = cfg.control_variates == ControlVariates::active;
  auto participants = draw_participants(server, cfg);
  const std::size_t count = participants.size();

  // Session 1: collect stochastic gradients at z_t.
  if (active) {
    for_each_participant(count, cfg.threads, [&](std::size_t s) {
      ClientState& c = clients[participants[s]];
      RngStream rng(cfg.seed, StreamPurpose::variate_refresh, c.id, server.round);
      c.v = p.stochastic_gradient(c.id, server.z, rng);
      c.anchor_round = static_cast<std::int64_t>(server.round);
      c.samples += 1;
    });
    std::vector<Vector> vx, vy;
    vx.reserve(count);
    vy.reserve(count);
    for (std::size_t i : participants) {
      vx.push_back(clients[i].v.x);
      vy.push_back(clients[i].v.y);
    }
    server.vbar = {mean_of(vx), mean_of(vy)};
  }

  // Session 2: corrected local steps.
  const Gradient zero = zero_gradient(p);
  std::vector<Point> returns(count);
  try {
    for_each_participant(count, cfg.threads, [&](std::size_t s) {
      ClientState& c = clients[participants[s]];
      RngStream rng(cfg.seed, StreamPurpose::local_steps, c.id, server.round);
      returns[s] = active ? local_sagda_steps(p, c.id, server.z, c.v, server.vbar, cfg, rng, observer)
                          : local_sagda_steps(p, c.id, server.z, zero, zero, cfg, rng, observer);
      c.samples += cfg.K * cfg.batch;
    });
  } catch (const DivergenceError& e) {
    throw DivergenceError(context(cfg, server.round) + e.what());
  }
  return finish_round(server, clients, std::move(participants), returns, cfg, 2);
}

RoundRecord fsgda_round(ServerState& server, std::vector<ClientState>& clients,
                        const MinMaxProblem& p, const AlgoConfig& cfg,
                        const LocalStepObserver& observer) {
  return plain_round(server, clients, p, cfg, observer);
}

RoundRecord parallel_sgda_round(ServerState& server, std::vector<ClientState>& clients,
                                const MinMaxProblem& p, const AlgoConfig& cfg,
                                const LocalStepObserver& observer) {
  AlgoConfig c = cfg;
  c.algorithm = Algorithm::parallel_sgda;
  return plain_round(server, clients, p, c.resolved(), observer);
}

RoundRecord cd_ma_round(ServerState& server, std::vector<ClientState>& clients,
                        const MinMaxProblem& p, const AlgoConfig& cfg,
                        const LocalStepObserver& observer) {
  AlgoConfig c = cfg;
  c.algorithm = Algorithm::cd_ma;
  return plain_round(server, clients, p, c.resolved(), observer);
}

FederatedEngine::FederatedEngine(const MinMaxProblem& problem, const AlgoConfig& cfg, Point z0)
    : problem_(problem), cfg_(cfg.resolved()) {
  cfg_.validate(problem_);
  problem_.check_point(z0);
  server_.z = std::move(z0);
  server_.vbar = zero_gradient(problem_);
  clients_.resize(cfg_.M);
  for (std::size_t i = 0; i < cfg_.M; ++i) {
    clients_[i].id = i;
    clients_[i].v = zero_gradient(problem_);
  }
  if (cfg_.algorithm == Algorithm::sagda_i && cfg_.control_variates == ControlVariates::active) {
    initialize_option1(server_, clients_, problem_, cfg_);
  }
}

RoundRecord FederatedEngine::step(const LocalStepObserver& observer) {
  switch (cfg_.algorithm) {
    case Algorithm::sagda_i: return option1_round(server_, clients_, problem_, cfg_, observer);
    case Algorithm::sagda_ii: return option2_round(server_, clients_, problem_, cfg_, observer);
    case Algorithm::fsgda: return fsgda_round(server_, clients_, problem_, cfg_, observer);
    case Algorithm::parallel_sgda: return parallel_sgda_round(server_, clients_, problem_, cfg_, observer);
    case Algorithm::cd_ma: return cd_ma_round(server_, clients_, problem_, cfg_, observer);
  }
  throw std::logic_error("unreachable algorithm");
}

RunResult run(const MinMaxProblem& problem, const AlgoConfig& cfg, const Point& z0,
              const RunOptions& options) {
  if (options.eval_every < 1) throw std::invalid_argument("run: eval_every must be >= 1");
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  FederatedEngine engine(problem, cfg, z0);
  RunResult result;
  if (options.metrics && options.evaluate_initial) result.initial = options.metrics(z0);
  result.records.reserve(cfg.T);
  for (std::size_t t = 0; t < cfg.T; ++t) {
    const auto round_start = clock::now();
    RoundRecord rec = engine.step();
    if (options.metrics && ((t + 1) % options.eval_every == 0 || t + 1 == cfg.T)) {
      rec.metrics = options.metrics(engine.server().z);
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - round_start).count();
    result.records.push_back(std::move(rec));
  }
  result.final_state = engine.server();
  result.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
  return result;
}

}  // namespace sagda
