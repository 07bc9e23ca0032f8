#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sagda/problem.hpp"
#include "sagda/rng.hpp"

namespace sagda {

enum class Algorithm { sagda_i, sagda_ii, fsgda, parallel_sgda, cd_ma };

Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm a);

/// `zeroed` keeps every control variate at zero and skips the variate
/// exchange; SAGDA then reduces to FSGDA. Used to probe that collapse.
enum class ControlVariates { active, zeroed };

struct AlgoConfig {
  Algorithm algorithm = Algorithm::sagda_ii;
  double eta_xl = 1e-2;
  double eta_yl = 1e-2;
  double eta_xg = 1.0;
  double eta_yg = 1.0;
  std::size_t K = 1;
  std::size_t M = 1;
  std::size_t m = 1;
  std::size_t T = 0;
  std::uint64_t seed = 0;
  std::size_t batch = 1;
  ControlVariates control_variates = ControlVariates::active;
  std::size_t threads = 1;
  double divergence_bound = 1e12;

  double eta_x() const noexcept { return eta_xl * eta_xg; }
  double eta_y() const noexcept { return eta_yl * eta_yg; }
  bool uses_control_variates() const noexcept {
    return (algorithm == Algorithm::sagda_i || algorithm == Algorithm::sagda_ii) &&
           control_variates == ControlVariates::active;
  }

  /// Applies the baselines' fixed settings: parallel_sgda runs K=1, m=M and
  /// unit global rates; cd_ma runs unit global rates.
  AlgoConfig resolved() const;
  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
  void validate(const MinMaxProblem& p) const;
};

struct ServerState {
  Point z;
  Gradient vbar;  // global control variates; zero unless SAGDA is active
  std::uint64_t round = 0;
  std::uint64_t comm_sessions = 0;
  std::vector<std::size_t> last_participants;
  std::vector<Gradient> pending_deltas;  // Option I deltas from last round, in participant order
};

struct ClientState {
  std::size_t id = 0;
  Gradient v;                      // client control variates
  std::int64_t anchor_round = -1;  // round of the last refresh; -2 marks the initial pass
  std::uint64_t samples = 0;       // cumulative stochastic draws
};

struct RoundMetrics {
  bool evaluated = false;
  double grad_norm_phi_sq = std::numeric_limits<double>::quiet_NaN();
  double grad_norm_x_sq = std::numeric_limits<double>::quiet_NaN();
  double grad_norm_y_sq = std::numeric_limits<double>::quiet_NaN();
  double f_value = std::numeric_limits<double>::quiet_NaN();
  bool phi_converged = true;
};

/// State after round t: metrics are evaluated at z_{t+1} and counters include
/// everything consumed through round t.
struct RoundRecord {
  std::uint64_t t = 0;
  std::vector<std::size_t> participants;
  RoundMetrics metrics;
  std::vector<std::uint64_t> cumulative_samples_per_client;
  std::uint64_t comm_sessions = 0;
  double wall_ms = 0.0;

  double mean_samples_per_client() const;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invoked for each local step with the update direction (descent direction
/// for x, ascent direction for y). Called from worker threads when
/// cfg.threads > 1.
using LocalStepObserver = std::function<void(std::size_t client, std::size_t k, const Gradient& direction)>;

/// m distinct clients uniformly from [0, M), ascending.
std::vector<std::size_t> sample_clients(std::size_t M, std::size_t m, RngStream& rng);

/// K local steps with the control-variate corrected directions
///   v^k = grad f_i(z^k, xi^k) - v_i + vbar,  x -= eta_xl v_x^k,  y += eta_yl v_y^k.
Point local_sagda_steps(const MinMaxProblem& p, std::size_t client, const Point& z_t,
                        const Gradient& v_i, const Gradient& vbar, const AlgoConfig& cfg,
                        RngStream& rng, const LocalStepObserver& observer = {});

/// K plain local SGDA steps (FSGDA client loop).
Point local_sgda_steps(const MinMaxProblem& p, std::size_t client, const Point& z_t,
                       const AlgoConfig& cfg, RngStream& rng, const LocalStepObserver& observer = {});

/// x_{t+1} = x_t + eta_xg ((1/m) sum_i x_i - x_t), likewise for y, summed in
/// the given (ascending client) order.
Point server_aggregate(const Point& z_t, std::span<const Point> returns, const AlgoConfig& cfg);

/// Sets every client variate to a stochastic gradient at z0 and vbar to their
/// mean (full participation). Needed before the first Option I round.
void initialize_option1(ServerState& server, std::vector<ClientState>& clients,
                        const MinMaxProblem& p, const AlgoConfig& cfg);

RoundRecord option1_round(ServerState& server, std::vector<ClientState>& clients,
                          const MinMaxProblem& p, const AlgoConfig& cfg,
                          const LocalStepObserver& observer = {});
RoundRecord option2_round(ServerState& server, std::vector<ClientState>& clients,
                          const MinMaxProblem& p, const AlgoConfig& cfg,
                          const LocalStepObserver& observer = {});
RoundRecord fsgda_round(ServerState& server, std::vector<ClientState>& clients,
                        const MinMaxProblem& p, const AlgoConfig& cfg,
                        const LocalStepObserver& observer = {});
RoundRecord parallel_sgda_round(ServerState& server, std::vector<ClientState>& clients,
                                const MinMaxProblem& p, const AlgoConfig& cfg,
                                const LocalStepObserver& observer = {});
RoundRecord cd_ma_round(ServerState& server, std::vector<ClientState>& clients,
                        const MinMaxProblem& p, const AlgoConfig& cfg,
                        const LocalStepObserver& observer = {});

/// Server and client state for one run of the configured algorithm.
class FederatedEngine {
 public:
  FederatedEngine(const MinMaxProblem& problem, const AlgoConfig& cfg, Point z0);

  RoundRecord step(const LocalStepObserver& observer = {});

  const AlgoConfig& config() const noexcept { return cfg_; }
  const ServerState& server() const noexcept { return server_; }
  ServerState& server() noexcept { return server_; }
  const std::vector<ClientState>& clients() const noexcept { return clients_; }
  std::vector<ClientState>& clients() noexcept { return clients_; }

 private:
  const MinMaxProblem& problem_;
  AlgoConfig cfg_;
  ServerState server_;
  std::vector<ClientState> clients_;
};

using MetricsHook = std::function<RoundMetrics(const Point& z)>;

struct RunOptions {
  std::size_t eval_every = 1;
  MetricsHook metrics;  // optional
  bool evaluate_initial = true;
};

struct RunResult {
  std::vector<RoundRecord> records;
  RoundMetrics initial;  // metrics at z_0
  ServerState final_state;
  double wall_ms = 0.0;
};

/// T rounds of cfg.algorithm from z0. Metrics run every eval_every rounds and
/// always on the last round.
RunResult run(const MinMaxProblem& problem, const AlgoConfig& cfg, const Point& z0,
              const RunOptions& options = {});

}  // namespace sagda
