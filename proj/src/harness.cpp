#include "sagda/harness.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sagda {

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "logreg_robust") return ProblemKind::logreg_robust;
  if (name == "auc") return ProblemKind::auc;
  if (name == "synthetic_pl") return ProblemKind::synthetic_pl;
  throw std::invalid_argument("unknown problem '" + std::string(name) +
                              "' (expected logreg_robust, auc or synthetic_pl)");
}

std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::logreg_robust: return "logreg_robust";
    case ProblemKind::auc: return "auc";
    case ProblemKind::synthetic_pl: return "synthetic_pl";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  algo.validate();
  if (eval_every < 1) throw std::invalid_argument("invalid config: eval_every must be >= 1");
  if (smooth_window < 1) throw std::invalid_argument("invalid config: smooth_window must be >= 1");
  if (problem != ProblemKind::synthetic_pl && dataset_path.empty()) {
    throw std::invalid_argument("invalid config: " + std::string(to_string(problem)) + " needs a dataset path");
  }
  if (problem == ProblemKind::synthetic_pl && synth_dim < 1) {
    throw std::invalid_argument("invalid config: synthetic dimension must be >= 1");
  }
  if (!(init_scale >= 0.0)) throw std::invalid_argument("invalid config: init_scale must be >= 0");
}

namespace {

std::vector<Sample> binarize(const ExperimentConfig& cfg, const std::vector<Sample>& samples) {
  const auto positive = [&](double label) {
    return cfg.positive_label ? label == *cfg.positive_label : label > 0.0;
  };
  if (cfg.per_class > 0) return binarize_and_subsample(samples, positive, cfg.per_class, cfg.algo.seed);
  std::vector<Sample> out = samples;
  for (auto& s : out) s.label = positive(s.label) ? 1.0 : -1.0;
  return out;
}

}  // namespace

BuiltProblem build_problem(const ExperimentConfig& cfg) {
  cfg.validate();
  BuiltProblem out;
  if (cfg.problem == ProblemKind::synthetic_pl) {
    SyntheticPLConfig s;
    s.dim = cfg.synth_dim;
    s.clients = cfg.algo.M;
    s.mu = cfg.mu;
    s.heterogeneity = cfg.heterogeneity;
    s.sigma_x = cfg.sigma_x;
    s.sigma_y = cfg.sigma_y;
    s.singular_min = cfg.singular_min;
    s.singular_max = cfg.singular_max;
    s.shift_scale = cfg.shift_scale;
    s.seed = cfg.algo.seed;
    out.problem = std::make_unique<SyntheticPLProblem>(SyntheticPLProblem::generate(s));
    return out;
  }

  const Dataset data = load_libsvm_file(cfg.dataset_path, cfg.dim_hint);
  const std::vector<Sample> samples = binarize(cfg, data.samples);
  const Partition part = partition(samples, cfg.algo.M, cfg.partition, cfg.algo.seed);
  out.total_samples = samples.size();
  out.dropped = part.dropped;
  out.shard_size = part.shard_size();
  ClientShards shards = ClientShards::from_partition(samples, part);
  if (cfg.problem == ProblemKind::logreg_robust) {
    auto p = std::make_unique<RobustLogRegProblem>(std::move(shards), RobustLogRegParams{cfg.lambda2, cfg.alpha});
    out.lambda1 = p->lambda1();
    out.problem = std::move(p);
  } else {
    auto p = std::make_unique<AUCProblem>(std::move(shards));
    out.tau = p->tau();
    out.problem = std::move(p);
  }
  return out;
}

Point initial_point(const MinMaxProblem& p, const ExperimentConfig& cfg) {
  RngStream rng(cfg.algo.seed, StreamPurpose::init_point, 0, 0);
  return random_point(p, rng, cfg.init_scale);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

ConfigEcho config_echo(const ExperimentConfig& cfg, const BuiltProblem& built,
                       const PhiEstimatorConfig& phi) {
  const AlgoConfig a = cfg.algo.resolved();
  ConfigEcho e;
  auto put = [&](std::string k, std::string v) { e.emplace_back(std::move(k), std::move(v)); };
  auto num = [&](std::string k, double v) { put(std::move(k), format_double(v)); };
  auto cnt = [&](std::string k, std::uint64_t v) { put(std::move(k), std::to_string(v)); };

  put("problem", std::string(to_string(cfg.problem)));
  if (cfg.problem == ProblemKind::synthetic_pl) {
    cnt("synth_dim", cfg.synth_dim);
    num("mu", cfg.mu);
    num("heterogeneity", cfg.heterogeneity);
    num("sigma_x", cfg.sigma_x);
    num("sigma_y", cfg.sigma_y);
    num("singular_min", cfg.singular_min);
    num("singular_max", cfg.singular_max);
    num("shift_scale", cfg.shift_scale);
  } else {
    put("data", cfg.dataset_path);
    put("partition", std::string(to_string(cfg.partition)));
    cnt("per_class", cfg.per_class);
    put("positive_label", cfg.positive_label ? format_double(*cfg.positive_label) : std::string(">0"));
    cnt("dim_hint", cfg.dim_hint);
    cnt("total_samples", built.total_samples);
    cnt("dropped", built.dropped);
    cnt("shard_size", built.shard_size);
    if (cfg.problem == ProblemKind::logreg_robust) {
      num("lambda1", *built.lambda1);
      num("lambda2", cfg.lambda2);
      num("alpha", cfg.alpha);
    }
    if (built.tau) num("tau", *built.tau);
  }
  if (built.problem) {
    cnt("dim_x", built.problem->dim_x());
    cnt("dim_y", built.problem->dim_y());
  }
  put("algo", std::string(to_string(a.algorithm)));
  put("control_variates", a.control_variates == ControlVariates::active ? "active" : "zeroed");
  cnt("M", a.M);
  cnt("m", a.m);
  cnt("K", a.K);
  cnt("T", a.T);
  cnt("batch", a.batch);
  num("eta_xl", a.eta_xl);
  num("eta_yl", a.eta_yl);
  num("eta_xg", a.eta_xg);
  num("eta_yg", a.eta_yg);
  num("eta_x", a.eta_x());
  num("eta_y", a.eta_y());
  cnt("seed", a.seed);
  cnt("threads", a.threads);
  num("divergence_bound", a.divergence_bound);
  cnt("eval_every", cfg.eval_every);
  cnt("smooth_window", cfg.smooth_window);
  num("init_scale", cfg.init_scale);
  put("phi_mode", std::string(to_string(phi.mode)));
  cnt("phi_max_steps", phi.max_inner_steps);
  num("phi_step", phi.inner_step);
  num("phi_tol", phi.tol);
  return e;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const BuiltProblem& built) {
  cfg.validate();
  const MinMaxProblem& p = *built.problem;
  const PhiEstimatorConfig phi = resolve_phi_config(p, cfg.phi, cfg.algo.seed);
  ExperimentResult out;
  out.echo = config_echo(cfg, built, phi);
  RunOptions opts;
  opts.eval_every = cfg.eval_every;
  opts.metrics = make_metrics_hook(p, phi);
  out.run = run(p, cfg.algo, initial_point(p, cfg), opts);
  out.smoothed_phi = smoothed_phi_series(out.run.records, cfg.smooth_window);
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const BuiltProblem built = build_problem(cfg);
  return run_experiment(cfg, built);
}

std::vector<double> smoothed_phi_series(const std::vector<RoundRecord>& records, std::size_t window) {
  std::vector<double> raw;
  for (const auto& r : records)
    if (r.metrics.evaluated) raw.push_back(r.metrics.grad_norm_phi_sq);
  const std::vector<double> sm = smooth(raw, window);
  std::vector<double> out(records.size(), std::numeric_limits<double>::quiet_NaN());
  std::size_t j = 0;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].metrics.evaluated) out[i] = sm[j++];
  return out;
}

void write_csv(std::ostream& os, const std::vector<RoundRecord>& records, std::size_t window,
               const ConfigEcho& echo) {
  for (const auto& [k, v] : echo) os << "# " << k << "=" << v << "\n";
  os << kCsvHeader << "\n";
  const std::vector<double> sm = smoothed_phi_series(records, window);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RoundRecord& r = records[i];
    os << (r.t + 1) << ',' << format_double(r.mean_samples_per_client()) << ',' << r.comm_sessions << ','
       << format_double(r.metrics.grad_norm_phi_sq) << ',' << format_double(r.metrics.grad_norm_x_sq) << ','
       << format_double(r.metrics.grad_norm_y_sq) << ',' << format_double(r.metrics.f_value) << ','
       << format_double(sm[i]) << "\n";
  }
}

namespace {

std::ofstream open_output(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  return f;
}

void finish_output(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

void write_csv(const std::string& path, const std::vector<RoundRecord>& records, std::size_t window,
               const ConfigEcho& echo) {
  std::ofstream f = open_output(path);
  write_csv(f, records, window, echo);
  finish_output(f, path);
}

void write_summary(std::ostream& os, const ExperimentResult& result, bool include_timing) {
  const RunResult& r = result.run;
  for (const auto& [k, v] : result.echo) os << k << "=" << v << "\n";
  os << "rounds=" << r.records.size() << "\n";
  os << "initial_grad_norm_phi_sq=" << format_double(r.initial.grad_norm_phi_sq) << "\n";
  const RoundRecord* last = nullptr;
  for (auto it = r.records.rbegin(); it != r.records.rend(); ++it) {
    if (it->metrics.evaluated) {
      last = &*it;
      break;
    }
  }
  if (last) {
    os << "final_grad_norm_phi_sq=" << format_double(last->metrics.grad_norm_phi_sq) << "\n"
       << "final_grad_norm_x_sq=" << format_double(last->metrics.grad_norm_x_sq) << "\n"
       << "final_grad_norm_y_sq=" << format_double(last->metrics.grad_norm_y_sq) << "\n"
       << "final_f_value=" << format_double(last->metrics.f_value) << "\n"
       << "final_phi_converged=" << (last->metrics.phi_converged ? 1 : 0) << "\n";
  }
  if (!r.records.empty()) {
    const RoundRecord& end = r.records.back();
    os << "samples_per_client=" << format_double(end.mean_samples_per_client()) << "\n"
       << "comm_sessions=" << end.comm_sessions << "\n";
  } else {
    os << "samples_per_client=0\ncomm_sessions=0\n";
  }
  if (include_timing) os << "wall_ms=" << format_double(r.wall_ms) << "\n";
}

void write_summary(const std::string& path, const ExperimentResult& result, bool include_timing) {
  std::ofstream f = open_output(path);
  write_summary(f, result, include_timing);
  finish_output(f, path);
}

std::optional<std::size_t> rounds_to_threshold(const RunResult& run, std::size_t window, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("rounds_to_threshold: threshold must be > 0");
  std::vector<double> raw;
  std::vector<std::size_t> rounds;
  if (run.initial.evaluated) {
    raw.push_back(run.initial.grad_norm_phi_sq);
    rounds.push_back(0);
  }
  for (const auto& r : run.records) {
    if (!r.metrics.evaluated) continue;
    raw.push_back(r.metrics.grad_norm_phi_sq);
    rounds.push_back(static_cast<std::size_t>(r.t + 1));
  }
  const std::vector<double> sm = smooth(raw, window);
  for (std::size_t i = 0; i < sm.size(); ++i)
    if (sm[i] <= threshold) return rounds[i];
  return std::nullopt;
}

std::vector<SweepCell> run_sweep(const ExperimentConfig& base, const SweepGrid& grid, const std::string& out_dir) {
  const auto algos = grid.algorithms.empty() ? std::vector<Algorithm>{base.algo.algorithm} : grid.algorithms;
  const auto ms = grid.m_values.empty() ? std::vector<std::size_t>{base.algo.m} : grid.m_values;
  const auto Ks = grid.K_values.empty() ? std::vector<std::size_t>{base.algo.K} : grid.K_values;
  const auto seeds = grid.seeds.empty() ? std::vector<std::uint64_t>{base.algo.seed} : grid.seeds;

  std::vector<SweepCell> cells;
  for (Algorithm a : algos)
    for (std::size_t m : ms)
      for (std::size_t K : Ks)
        for (std::uint64_t seed : seeds) {
          SweepCell cell{a, m, K, seed, {}, {}, std::numeric_limits<double>::quiet_NaN()};
          ExperimentConfig cfg = base;
          cfg.algo.algorithm = a;
          cfg.algo.m = m;
          cfg.algo.K = K;
          cfg.algo.seed = seed;
          const std::string name = std::string(to_string(a)) + "_m" + std::to_string(m) + "_K" +
                                   std::to_string(K) + "_seed" + std::to_string(seed) + ".csv";
          try {
            const ExperimentResult res = run_experiment(cfg);
            const std::string path = (std::filesystem::path(out_dir) / name).string();
            write_csv(path, res.run.records, cfg.smooth_window, res.echo);
            cell.file = name;
            if (!res.run.records.empty()) cell.final_phi_sq = res.run.records.back().metrics.grad_norm_phi_sq;
          } catch (const std::exception& e) {
            cell.error = e.what();
          }
          cells.push_back(std::move(cell));
        }

  const std::string index = (std::filesystem::path(out_dir) / "index.csv").string();
  std::ofstream f = open_output(index);
  f << "algo,m,K,seed,status,final_grad_norm_phi_sq,file,error\n";
  for (const auto& c : cells) {
    std::string err = c.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n') ch = ' ';
    f << to_string(c.algorithm) << ',' << c.m << ',' << c.K << ',' << c.seed << ','
      << (c.error.empty() ? "ok" : "failed") << ',' << format_double(c.final_phi_sq) << ',' << c.file << ','
      << err << "\n";
  }
  finish_output(f, index);
  return cells;
}

SpeedupTable speedup_sweep(const ExperimentConfig& base, const std::vector<std::size_t>& m_values,
                           const std::vector<std::size_t>& K_values, double threshold, const RateRule& rule) {
  if (!(threshold > 0.0)) throw std::invalid_argument("speedup_sweep: threshold must be > 0");
  if (m_values.empty() || K_values.empty()) throw std::invalid_argument("speedup_sweep: empty grid");
  SpeedupTable table;
  table.m_values = m_values;
  table.K_values = K_values;
  table.threshold = threshold;
  for (std::size_t m : m_values)
    for (std::size_t K : K_values) {
      SpeedupCell cell{m, K, std::nullopt, {}};
      try {
        ExperimentConfig cfg = base;
        cfg.algo.m = m;
        cfg.algo.K = K;
        if (rule) rule(cfg.algo);
        const ExperimentResult res = run_experiment(cfg);
        cell.rounds = rounds_to_threshold(res.run, cfg.smooth_window, threshold);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      table.cells.push_back(std::move(cell));
    }
  return table;
}

void write_speedup_csv(std::ostream& os, const SpeedupTable& t) {
  os << "# threshold=" << format_double(t.threshold) << "\n";
  os << "m\\K";
  for (std::size_t K : t.K_values) os << ',' << K;
  os << "\n";
  for (std::size_t i = 0; i < t.m_values.size(); ++i) {
    os << t.m_values[i];
    for (std::size_t j = 0; j < t.K_values.size(); ++j) {
      const SpeedupCell& c = t.at(i, j);
      os << ',';
      if (!c.error.empty()) os << "failed";
      else if (c.rounds) os << *c.rounds;
      else os << "none";
    }
    os << "\n";
  }
}

void apply_corollary_rates(AlgoConfig& a, double c_eta, double c_local) {
  if (!(c_eta > 0.0) || !(c_local > 0.0)) throw std::invalid_argument("corollary rates: constants must be > 0");
  if (a.T < 1) throw std::invalid_argument("corollary rates: need T >= 1");
  const double m = static_cast<double>(a.m), K = static_cast<double>(a.K), T = static_cast<double>(a.T);
  const double eta = c_eta * std::sqrt(m) / std::sqrt(K * T);
  const double eta_l = c_local * std::min(1.0 / (std::sqrt(m) * std::pow(K, 1.5)),
                                          std::pow(K, 0.75) / (std::pow(m, 0.25) * std::pow(T, 0.25)));
  a.eta_xl = a.eta_yl = eta_l;
  a.eta_xg = a.eta_yg = eta / eta_l;
}

// -------------------------------------------------------------------- CLI --

namespace {

struct CliState {
  ExperimentConfig cfg;
  std::string problem = "synthetic_pl";
  std::string partition = "label_sorted";
  std::string algo = "sagda_ii";
  std::string phi_mode = "analytic_if_available";
  double positive_label = 0.0;
  bool zero_variates = false;
  bool no_timing = false;
  std::string out_dir;
  std::string name = "run";

  // sweep / speedup
  std::vector<std::string> algos;
  std::vector<std::size_t> m_values;
  std::vector<std::size_t> K_values;
  std::vector<std::uint64_t> seeds;
  double threshold = 0.0;
  std::vector<double> corollary;

  // check-lr
  std::string which = "fsgda";
  double Lf = 0.0;
  double mu_check = 0.0;
  std::string report;
  std::string config_file;  // expanded before parsing
};

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Replaces "--config FILE" with the file's key=value pairs as flags, placed
// ahead of the command-line flags and skipped where a flag is given.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty()) return args;
  std::vector<std::string> rest;
  std::string file;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file = args[++i];
    else if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
    else rest.push_back(args[i]);
  }
  std::vector<std::string> out{args[0]};
  if (!file.empty()) {
    if (!std::filesystem::exists(file)) throw CLI::FileError::Missing(file);
    for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(file)) {
      if (item.name == "++" || item.name == "--") continue;
      if (!item.parents.empty() && item.parents.front() != args[0]) continue;
      std::string key = item.name;
      std::replace(key.begin(), key.end(), '_', '-');
      const std::string flag = "--" + key;
      if (has_flag(rest, flag)) continue;
      if (item.inputs.size() == 1) {
        out.push_back(flag + "=" + item.inputs.front());
      } else {
        out.push_back(flag);
        out.insert(out.end(), item.inputs.begin(), item.inputs.end());
      }
    }
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

void add_problem_options(CLI::App* app, CliState& s) {
  ExperimentConfig& c = s.cfg;
  app->add_option("--problem", s.problem, "logreg_robust | auc | synthetic_pl")->capture_default_str();
  app->add_option("--data", c.dataset_path, "LIBSVM dataset file");
  app->add_option("--partition", s.partition, "label_sorted | iid_shuffle")->capture_default_str();
  app->add_option("--per-class", c.per_class, "samples kept per class (0 = all)")->capture_default_str();
  app->add_option("--positive-label", s.positive_label, "label mapped to +1 (default: label > 0)");
  app->add_option("--dim", c.dim_hint, "minimum feature dimension")->capture_default_str();
  app->add_option("--lambda2", c.lambda2)->capture_default_str();
  app->add_option("--alpha", c.alpha)->capture_default_str();
  app->add_option("--synth-dim", c.synth_dim)->capture_default_str();
  app->add_option("--mu", c.mu)->capture_default_str();
  app->add_option("--heterogeneity", c.heterogeneity)->capture_default_str();
  app->add_option("--sigma-x", c.sigma_x)->capture_default_str();
  app->add_option("--sigma-y", c.sigma_y)->capture_default_str();
  app->add_option("--singular-min", c.singular_min)->capture_default_str();
  app->add_option("--singular-max", c.singular_max)->capture_default_str();
  app->add_option("--shift-scale", c.shift_scale)->capture_default_str();
  app->add_option("--M", c.algo.M, "number of clients")->capture_default_str();
  app->add_option("--seed", c.algo.seed)->capture_default_str();
}

void add_run_options(CLI::App* app, CliState& s, bool require_T) {
  ExperimentConfig& c = s.cfg;
  add_problem_options(app, s);
  app->add_option("--algo", s.algo, "sagda_i | sagda_ii | fsgda | parallel_sgda | cd_ma")->capture_default_str();
  app->add_option("--m", c.algo.m, "clients per round")->capture_default_str();
  app->add_option("--K", c.algo.K, "local steps")->capture_default_str();
  auto* T = app->add_option("--T", c.algo.T, "communication rounds");
  if (require_T) T->required();
  app->add_option("--batch", c.algo.batch)->capture_default_str();
  app->add_option("--eta-xl", c.algo.eta_xl)->capture_default_str();
  app->add_option("--eta-yl", c.algo.eta_yl)->capture_default_str();
  app->add_option("--eta-xg", c.algo.eta_xg)->capture_default_str();
  app->add_option("--eta-yg", c.algo.eta_yg)->capture_default_str();
  app->add_option("--threads", c.algo.threads)->capture_default_str();
  app->add_option("--divergence-bound", c.algo.divergence_bound)->capture_default_str();
  app->add_flag("--zero-variates", s.zero_variates, "keep SAGDA control variates at zero");
  app->add_option("--eval-every", c.eval_every)->capture_default_str();
  app->add_option("--smooth-window", c.smooth_window)->capture_default_str();
  app->add_option("--init-scale", c.init_scale)->capture_default_str();
  app->add_option("--phi-mode", s.phi_mode, "analytic_if_available | inner_ascent")->capture_default_str();
  app->add_option("--phi-max-steps", c.phi.max_inner_steps)->capture_default_str();
  app->add_option("--phi-step", c.phi.inner_step, "inner ascent step (default 0.5 / L_f estimate)");
  app->add_option("--phi-tol", c.phi.tol)->capture_default_str();
  app->add_option("--out-dir", s.out_dir, "output directory (default $SAGDA_OUTPUT_DIR or .)");
  app->add_option("--name", s.name, "output file stem")->capture_default_str();
  app->add_flag("--no-timing", s.no_timing, "omit wall time from the summary");
}

void finalize(CliState& s, const CLI::App* app) {
  ExperimentConfig& c = s.cfg;
  c.problem = parse_problem_kind(s.problem);
  c.partition = parse_partition_mode(s.partition);
  if (app->count("--positive-label") > 0) c.positive_label = s.positive_label;
  if (app->get_option_no_throw("--algo")) c.algo.algorithm = parse_algorithm(s.algo);
  if (app->get_option_no_throw("--phi-mode")) c.phi.mode = parse_phi_mode(s.phi_mode);
  if (s.zero_variates) c.algo.control_variates = ControlVariates::zeroed;
  if (s.out_dir.empty()) {
    const char* env = std::getenv("SAGDA_OUTPUT_DIR");
    s.out_dir = env && *env ? env : ".";
  }
}

std::string out_path(const CliState& s, const std::string& suffix) {
  return (std::filesystem::path(s.out_dir) / (s.name + suffix)).string();
}

int do_run(CliState& s) {
  const ExperimentResult res = run_experiment(s.cfg);
  const std::string csv = out_path(s, ".csv");
  write_csv(csv, res.run.records, s.cfg.smooth_window, res.echo);
  write_summary(out_path(s, ".summary.txt"), res, !s.no_timing);
  std::cout << "wrote " << csv << " (" << res.run.records.size() << " rounds)\n";
  return 0;
}

int do_sweep(CliState& s) {
  SweepGrid grid;
  for (const auto& a : s.algos) grid.algorithms.push_back(parse_algorithm(a));
  grid.m_values = s.m_values;
  grid.K_values = s.K_values;
  grid.seeds = s.seeds;
  const auto cells = run_sweep(s.cfg, grid, s.out_dir);
  std::size_t failed = 0;
  for (const auto& c : cells) failed += c.error.empty() ? 0 : 1;
  std::cout << "sweep: " << cells.size() << " cells, " << failed << " failed, index at "
            << (std::filesystem::path(s.out_dir) / "index.csv").string() << "\n";
  return 0;
}

int do_speedup(CliState& s) {
  if (s.m_values.empty()) s.m_values = {s.cfg.algo.m};
  if (s.K_values.empty()) s.K_values = {s.cfg.algo.K};
  RateRule rule;
  if (!s.corollary.empty()) {
    if (s.corollary.size() != 2) throw std::invalid_argument("--corollary-rates takes two values: c_eta c_local");
    const double ce = s.corollary[0], cl = s.corollary[1];
    rule = [ce, cl](AlgoConfig& a) { apply_corollary_rates(a, ce, cl); };
  }
  const SpeedupTable t = speedup_sweep(s.cfg, s.m_values, s.K_values, s.threshold, rule);
  const std::string path = out_path(s, ".speedup.csv");
  std::ofstream f = open_output(path);
  write_speedup_csv(f, t);
  finish_output(f, path);
  write_speedup_csv(std::cout, t);
  return 0;
}

int do_check_lr(CliState& s, const CLI::App* app) {
  ProblemConstants c;
  c.M = s.cfg.algo.M;
  c.m = s.cfg.algo.m;
  bool best_effort = false;
  if (app->count("--mu") == 0 && (app->count("--Lf") > 0 || s.cfg.problem != ProblemKind::synthetic_pl)) {
    throw std::invalid_argument("check-lr: --mu is required unless L_f is taken from a synthetic instance");
  }
  c.mu = s.cfg.mu;
  if (app->count("--Lf") > 0) {
    c.L_f = s.Lf;
  } else {
    const BuiltProblem built = build_problem(s.cfg);
    best_effort = !built.problem->analytic_smoothness().has_value();
    c.L_f = smoothness_hint(*built.problem, s.cfg.algo.seed);
  }
  const LearningRates r{s.cfg.algo.eta_xl, s.cfg.algo.eta_yl, s.cfg.algo.eta_xg, s.cfg.algo.eta_yg};
  ConstraintReport rep = check_lr_constraints(parse_constraint_set(s.which), c, r, s.cfg.algo.K);
  rep.best_effort = best_effort;
  std::cout << rep.table();
  const std::string path = s.report.empty() ? out_path(s, ".check_lr.txt") : s.report;
  std::ofstream f = open_output(path);
  f << rep.machine_readable();
  finish_output(f, path);
  return 0;
}

int do_parse_only(CliState& s) {
  const ExperimentConfig& c = s.cfg;
  if (c.dataset_path.empty()) throw std::invalid_argument("parse-only: --data is required");
  const Dataset data = load_libsvm_file(c.dataset_path, c.dim_hint);
  std::map<double, std::size_t> raw_counts;
  for (const auto& smp : data.samples) ++raw_counts[smp.label];
  std::cout << "N=" << data.samples.size() << "\n" << "d=" << data.dimension << "\n";
  for (const auto& [label, n] : raw_counts) std::cout << "label " << format_double(label) << ": " << n << "\n";
  const std::vector<Sample> bin = binarize(c, data.samples);
  std::size_t pos = 0;
  for (const auto& smp : bin) pos += smp.label > 0.0 ? 1 : 0;
  std::cout << "binarized: +1=" << pos << " -1=" << (bin.size() - pos) << "\n";
  const Partition p = partition(bin, c.algo.M, c.partition, c.algo.seed);
  std::cout << "shards=" << p.num_clients() << " shard_size=" << p.shard_size() << " dropped=" << p.dropped
            << " mode=" << to_string(p.mode) << "\n";
  std::size_t homogeneous = 0;
  for (const auto& shard : p.shards) {
    bool same = true;
    for (std::size_t idx : shard) same = same && bin[idx].label == bin[shard.front()].label;
    homogeneous += same ? 1 : 0;
  }
  std::cout << "label_homogeneous_shards=" << homogeneous << "\n";
  return 0;
}

}  // namespace

int cli_run(const std::vector<std::string>& args) {
  CLI::App app{"Federated min-max optimization experiments"};
  app.require_subcommand(1);
  CliState s;

  auto* run_cmd = app.add_subcommand("run", "single experiment: CSV + summary");
  run_cmd->add_option("--config", s.config_file, "key=value config file (flags win)");
  add_run_options(run_cmd, s, true);

  auto* sweep_cmd = app.add_subcommand("sweep", "grid over algorithm, m, K, seed");
  sweep_cmd->add_option("--config", s.config_file, "key=value config file (flags win)");
  add_run_options(sweep_cmd, s, true);
  sweep_cmd->add_option("--algos", s.algos, "algorithms to sweep")->delimiter(',');
  sweep_cmd->add_option("--m-values", s.m_values)->delimiter(',');
  sweep_cmd->add_option("--K-values", s.K_values)->delimiter(',');
  sweep_cmd->add_option("--seeds", s.seeds)->delimiter(',');

  auto* speed_cmd = app.add_subcommand("speedup", "rounds-to-threshold over an (m, K) grid");
  speed_cmd->add_option("--config", s.config_file, "key=value config file (flags win)");
  add_run_options(speed_cmd, s, true);
  speed_cmd->add_option("--m-values", s.m_values)->delimiter(',');
  speed_cmd->add_option("--K-values", s.K_values)->delimiter(',');
  speed_cmd->add_option("--threshold", s.threshold)->required();
  speed_cmd->add_option("--corollary-rates", s.corollary, "c_eta c_local: scale rates with m, K and T per cell")
      ->expected(2);

  auto* lr_cmd = app.add_subcommand("check-lr", "evaluate the learning-rate conditions");
  lr_cmd->add_option("--config", s.config_file, "key=value config file (flags win)");
  add_problem_options(lr_cmd, s);
  lr_cmd->add_option("--which", s.which, "sagda_i | sagda_ii | fsgda")->capture_default_str();
  lr_cmd->add_option("--K", s.cfg.algo.K)->capture_default_str();
  lr_cmd->add_option("--m", s.cfg.algo.m)->capture_default_str();
  lr_cmd->add_option("--Lf", s.Lf, "smoothness constant (estimated from the problem if omitted)");
  lr_cmd->add_option("--eta-xl", s.cfg.algo.eta_xl)->capture_default_str();
  lr_cmd->add_option("--eta-yl", s.cfg.algo.eta_yl)->capture_default_str();
  lr_cmd->add_option("--eta-xg", s.cfg.algo.eta_xg)->capture_default_str();
  lr_cmd->add_option("--eta-yg", s.cfg.algo.eta_yg)->capture_default_str();
  lr_cmd->add_option("--report", s.report, "machine-readable output path");
  lr_cmd->add_option("--out-dir", s.out_dir);
  lr_cmd->add_option("--name", s.name)->capture_default_str();

  auto* parse_cmd = app.add_subcommand("parse-only", "dataset statistics");
  add_problem_options(parse_cmd, s);

  try {
    const std::vector<std::string> expanded = expand_config(args);
    app.parse(std::vector<std::string>(expanded.rbegin(), expanded.rend()));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  }

  try {
    if (*run_cmd) {
      finalize(s, run_cmd);
      return do_run(s);
    }
    if (*sweep_cmd) {
      finalize(s, sweep_cmd);
      return do_sweep(s);
    }
    if (*speed_cmd) {
      finalize(s, speed_cmd);
      return do_speedup(s);
    }
    if (*lr_cmd) {
      finalize(s, lr_cmd);
      return do_check_lr(s, lr_cmd);
    }
    if (*parse_cmd) {
      finalize(s, parse_cmd);
      return do_parse_only(s);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int cli_run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_run(args);
}

}  // namespace sagda
