#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sagda/harness.hpp"

namespace py = pybind11;
using namespace sagda;

namespace {

std::vector<double> to_list(const Vector& v) { return v.values(); }

py::dict record_dict(const RoundRecord& r) {
  py::dict d;
  d["round"] = r.t + 1;
  d["participants"] = r.participants;
  d["samples_per_client"] = r.mean_samples_per_client();
  d["comm_sessions"] = r.comm_sessions;
  d["evaluated"] = r.metrics.evaluated;
  d["grad_norm_phi_sq"] = r.metrics.grad_norm_phi_sq;
  d["grad_norm_x_sq"] = r.metrics.grad_norm_x_sq;
  d["grad_norm_y_sq"] = r.metrics.grad_norm_y_sq;
  d["f_value"] = r.metrics.f_value;
  return d;
}

ExperimentConfig config_from_kwargs(const py::kwargs& kw) {
  ExperimentConfig c;
  for (auto item : kw) {
    const std::string k = py::cast<std::string>(item.first);
    py::handle v = item.second;
    if (k == "problem") c.problem = parse_problem_kind(py::cast<std::string>(v));
    else if (k == "data") c.dataset_path = py::cast<std::string>(v);
    else if (k == "partition") c.partition = parse_partition_mode(py::cast<std::string>(v));
    else if (k == "per_class") c.per_class = py::cast<std::size_t>(v);
    else if (k == "positive_label") c.positive_label = py::cast<double>(v);
    else if (k == "dim") c.dim_hint = py::cast<std::size_t>(v);
    else if (k == "lambda2") c.lambda2 = py::cast<double>(v);
    else if (k == "alpha") c.alpha = py::cast<double>(v);
    else if (k == "synth_dim") c.synth_dim = py::cast<std::size_t>(v);
    else if (k == "mu") c.mu = py::cast<double>(v);
    else if (k == "heterogeneity") c.heterogeneity = py::cast<double>(v);
    else if (k == "sigma_x") c.sigma_x = py::cast<double>(v);
    else if (k == "sigma_y") c.sigma_y = py::cast<double>(v);
    else if (k == "singular_min") c.singular_min = py::cast<double>(v);
    else if (k == "singular_max") c.singular_max = py::cast<double>(v);
    else if (k == "shift_scale") c.shift_scale = py::cast<double>(v);
    else if (k == "algo") c.algo.algorithm = parse_algorithm(py::cast<std::string>(v));
    else if (k == "M") c.algo.M = py::cast<std::size_t>(v);
    else if (k == "m") c.algo.m = py::cast<std::size_t>(v);
    else if (k == "K") c.algo.K = py::cast<std::size_t>(v);
    else if (k == "T") c.algo.T = py::cast<std::size_t>(v);
    else if (k == "batch") c.algo.batch = py::cast<std::size_t>(v);
    else if (k == "eta_xl") c.algo.eta_xl = py::cast<double>(v);
    else if (k == "eta_yl") c.algo.eta_yl = py::cast<double>(v);
    else if (k == "eta_xg") c.algo.eta_xg = py::cast<double>(v);
    else if (k == "eta_yg") c.algo.eta_yg = py::cast<double>(v);
    else if (k == "seed") c.algo.seed = py::cast<std::uint64_t>(v);
    else if (k == "threads") c.algo.threads = py::cast<std::size_t>(v);
    else if (k == "zero_variates") c.algo.control_variates = py::cast<bool>(v) ? ControlVariates::zeroed : ControlVariates::active;
    else if (k == "eval_every") c.eval_every = py::cast<std::size_t>(v);
    else if (k == "smooth_window") c.smooth_window = py::cast<std::size_t>(v);
    else if (k == "init_scale") c.init_scale = py::cast<double>(v);
    else if (k == "phi_mode") c.phi.mode = parse_phi_mode(py::cast<std::string>(v));
    else if (k == "phi_max_steps") c.phi.max_inner_steps = py::cast<std::size_t>(v);
    else if (k == "phi_step") c.phi.inner_step = py::cast<double>(v);
    else if (k == "phi_tol") c.phi.tol = py::cast<double>(v);
    else throw py::key_error("unknown experiment option '" + k + "'");
  }
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Federated min-max optimization core";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  m.def(
      "parse_libsvm",
      [](const std::string& text, std::size_t min_dimension) {
        const Dataset d = parse_libsvm_text(text, min_dimension);
        py::list rows;
        for (const auto& s : d.samples) rows.append(py::make_tuple(s.label, to_list(s.features)));
        return py::make_tuple(rows, d.dimension);
      },
      py::arg("text"), py::arg("min_dimension") = 0,
      "Parse LIBSVM text into ([(label, dense features)], dimension).");

  m.def(
      "serialize_libsvm",
      [](const std::vector<std::pair<double, std::vector<double>>>& rows) {
        std::vector<Sample> samples;
        for (const auto& [label, f] : rows) samples.push_back({Vector(f), label});
        return serialize_libsvm(samples);
      },
      py::arg("rows"));

  m.def(
      "partition_labels",
      [](const std::vector<double>& labels, std::size_t clients, const std::string& mode, std::uint64_t seed) {
        std::vector<Sample> samples;
        for (double l : labels) samples.push_back({Vector(1), l});
        return partition(samples, clients, parse_partition_mode(mode), seed).shards;
      },
      py::arg("labels"), py::arg("clients"), py::arg("mode") = "label_sorted", py::arg("seed") = 0,
      "Shard indices for a label list.");

  m.def(
      "sample_clients",
      [](std::size_t M, std::size_t mm, std::uint64_t seed, std::uint64_t round) {
        RngStream rng(seed, StreamPurpose::sampling, 0, round);
        return sample_clients(M, mm, rng);
      },
      py::arg("M"), py::arg("m"), py::arg("seed") = 0, py::arg("round") = 0);

  m.def("smooth", &smooth, py::arg("series"), py::arg("window") = 5);

  m.def(
      "check_lr_constraints",
      [](const std::string& which, double L_f, double mu, std::size_t K, double eta_xl, double eta_yl,
         double eta_xg, double eta_yg, std::size_t M, std::size_t mm) {
        const ConstraintReport r = check_lr_constraints(parse_constraint_set(which), {L_f, mu, M, mm},
                                                        {eta_xl, eta_yl, eta_xg, eta_yg}, K);
        py::dict d;
        d["satisfied"] = r.satisfied();
        d["L"] = r.L;
        d["eta_x"] = r.eta_x;
        d["eta_y"] = r.eta_y;
        py::dict consts;
        for (const auto& [k, v] : r.constants) consts[py::str(k)] = v;
        d["constants"] = consts;
        py::list ineq;
        for (const auto& q : r.inequalities) {
          py::dict e;
          e["name"] = q.name;
          e["lhs"] = q.lhs;
          e["rhs"] = q.rhs;
          e["op"] = q.less_equal ? "<=" : ">=";
          e["satisfied"] = q.satisfied;
          ineq.append(e);
        }
        d["inequalities"] = ineq;
        d["table"] = r.table();
        return d;
      },
      py::arg("which"), py::arg("L_f"), py::arg("mu"), py::arg("K"), py::arg("eta_xl"), py::arg("eta_yl"),
      py::arg("eta_xg") = 1.0, py::arg("eta_yg") = 1.0, py::arg("M") = 1, py::arg("m") = 1);

  m.def(
      "synthetic_phi",
      [](std::size_t dim, std::size_t clients, double mu, double heterogeneity, std::uint64_t seed,
         const std::vector<double>& x, const std::vector<double>& y_warm, const std::string& mode, double tol) {
        SyntheticPLConfig sc;
        sc.dim = dim;
        sc.clients = clients;
        sc.mu = mu;
        sc.heterogeneity = heterogeneity;
        sc.seed = seed;
        const SyntheticPLProblem p = SyntheticPLProblem::generate(sc);
        PhiEstimatorConfig cfg;
        cfg.mode = parse_phi_mode(mode);
        cfg.tol = tol;
        cfg = resolve_phi_config(p, cfg, seed);
        const PhiEstimate e = estimate_phi_grad(p, Vector(x), Vector(y_warm), cfg);
        return py::make_tuple(e.phi_grad_sq, to_list(e.y_star), e.converged);
      },
      py::arg("dim"), py::arg("clients"), py::arg("mu"), py::arg("heterogeneity"), py::arg("seed"),
      py::arg("x"), py::arg("y_warm"), py::arg("mode") = "inner_ascent", py::arg("tol") = 1e-8,
      "Phi gradient norm on a generated synthetic instance: (phi_grad_sq, y_star, converged).");

  m.def(
      "run_experiment",
      [](py::kwargs kw) {
        const ExperimentConfig cfg = config_from_kwargs(kw);
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(cfg);
        }
        py::dict out;
        py::list recs;
        for (const auto& r : res.run.records) recs.append(record_dict(r));
        out["records"] = recs;
        out["initial_grad_norm_phi_sq"] = res.run.initial.grad_norm_phi_sq;
        out["smoothed_grad_norm_phi_sq"] = res.smoothed_phi;
        py::dict echo;
        for (const auto& [k, v] : res.echo) echo[py::str(k)] = v;
        out["config"] = echo;
        std::ostringstream csv;
        write_csv(csv, res.run.records, cfg.smooth_window, res.echo);
        out["csv"] = csv.str();
        return out;
      },
      "Run one experiment; keyword options mirror the CLI flags (underscored).");

  m.def("cli", [](const std::vector<std::string>& args) { return cli_run(args); }, py::arg("args"),
        "Run the command-line tool with the given arguments; returns the exit code.");
}
