#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sagda/data_io.hpp"
#include "sagda/dataset_problems.hpp"
#include "sagda/fedcore.hpp"
#include "sagda/metrics.hpp"
#include "sagda/problem.hpp"
#include "sagda/synthetic_pl.hpp"

namespace sagda {

enum class ProblemKind { logreg_robust, auc, synthetic_pl };

ProblemKind parse_problem_kind(std::string_view name);
std::string_view to_string(ProblemKind k);

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::synthetic_pl;

  // LIBSVM problems
  std::string dataset_path;
  PartitionMode partition = PartitionMode::label_sorted;
  std::size_t per_class = 0;            // 0 keeps every sample
  std::optional<double> positive_label;  // unset: label > 0 is positive
  std::size_t dim_hint = 0;
  double lambda2 = 1e-3;
  double alpha = 10.0;

  // synthetic_pl
  std::size_t synth_dim = 4;
  double mu = 1.0;
  double heterogeneity = 0.0;
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double singular_min = 0.5;
  double singular_max = 1.5;
  double shift_scale = 0.0;

  AlgoConfig algo;
  std::size_t eval_every = 1;
  std::size_t smooth_window = 5;
  PhiEstimatorConfig phi;
  double init_scale = 1.0;

  void validate() const;
};

/// Problem instance plus the quantities derived while building it.
struct BuiltProblem {
  std::unique_ptr<MinMaxProblem> problem;
  std::size_t total_samples = 0;  // after subsampling
  std::size_t dropped = 0;        // partition tail
  std::size_t shard_size = 0;
  std::optional<double> lambda1;
  std::optional<double> tau;
};

BuiltProblem build_problem(const ExperimentConfig& cfg);

/// (x_0, y_0) ~ init_scale * N(0, I) from the run seed.
Point initial_point(const MinMaxProblem& p, const ExperimentConfig& cfg);

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

/// Every field of the resolved configuration, plus derived values (lambda1,
/// eta_x, eta_y, resolved inner step).
ConfigEcho config_echo(const ExperimentConfig& cfg, const BuiltProblem& built,
                       const PhiEstimatorConfig& resolved_phi);

struct ExperimentResult {
  RunResult run;
  ConfigEcho echo;
  std::vector<double> smoothed_phi;  // one entry per record
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const BuiltProblem& built);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

inline constexpr std::string_view kCsvHeader =
    "round,samples_per_client,comm_sessions,grad_norm_phi_sq,grad_norm_x_sq,grad_norm_y_sq,f_value,"
    "smoothed_grad_norm_phi_sq";

/// Smoothed phi column over the evaluated records; NaN for unevaluated rows.
std::vector<double> smoothed_phi_series(const std::vector<RoundRecord>& records, std::size_t window);

/// CSV with a '#'-prefixed config preamble, then kCsvHeader and one row per
/// record. `round` counts completed rounds.
void write_csv(std::ostream& os, const std::vector<RoundRecord>& records, std::size_t window,
               const ConfigEcho& echo = {});
void write_csv(const std::string& path, const std::vector<RoundRecord>& records, std::size_t window,
               const ConfigEcho& echo = {});

void write_summary(std::ostream& os, const ExperimentResult& result, bool include_timing = true);
void write_summary(const std::string& path, const ExperimentResult& result, bool include_timing = true);

/// Rounds completed before the smoothed phi series, which starts at z_0,
/// first drops to <= threshold.
std::optional<std::size_t> rounds_to_threshold(const RunResult& run, std::size_t window, double threshold);

struct SweepGrid {
  std::vector<Algorithm> algorithms;
  std::vector<std::size_t> m_values;
  std::vector<std::size_t> K_values;
  std::vector<std::uint64_t> seeds;
};

struct SweepCell {
  Algorithm algorithm;
  std::size_t m = 0;
  std::size_t K = 0;
  std::uint64_t seed = 0;
  std::string file;   // CSV path, empty if the cell failed
  std::string error;  // empty on success
  double final_phi_sq = 0.0;
};

/// One CSV per cell plus index.csv in out_dir. Failed cells are recorded and
/// skipped.
std::vector<SweepCell> run_sweep(const ExperimentConfig& base, const SweepGrid& grid,
                                 const std::string& out_dir);

struct SpeedupCell {
  std::size_t m = 0;
  std::size_t K = 0;
  std::optional<std::size_t> rounds;
  std::string error;
};

struct SpeedupTable {
  std::vector<std::size_t> m_values;
  std::vector<std::size_t> K_values;
  std::vector<SpeedupCell> cells;  // row-major over (m, K)
  double threshold = 0.0;

  const SpeedupCell& at(std::size_t mi, std::size_t ki) const { return cells[mi * K_values.size() + ki]; }
};

/// Optional rate schedule applied per (m, K) cell; identity when empty.
using RateRule = std::function<void(AlgoConfig&)>;

SpeedupTable speedup_sweep(const ExperimentConfig& base, const std::vector<std::size_t>& m_values,
                           const std::vector<std::size_t>& K_values, double threshold,
                           const RateRule& rule = {});

/// Matrix CSV: rows m, columns K; entries are rounds, "none" or "failed".
void write_speedup_csv(std::ostream& os, const SpeedupTable& table);

/// Rates scaled with m, K and T:
///   eta = c_eta sqrt(m) / sqrt(K T),
///   eta_l = c_local min(1 / (m^1/2 K^3/2), K^3/4 / (m^1/4 T^1/4)),
///   eta_g = eta / eta_l, for both x and y.
void apply_corollary_rates(AlgoConfig& algo, double c_eta, double c_local);

/// Entry point of the command-line tool.
int cli_run(int argc, const char* const* argv);
int cli_run(const std::vector<std::string>& args);

}  // namespace sagda
