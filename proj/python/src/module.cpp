#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gcgs/cli.hpp"
#include "gcgs/elasticnet.hpp"
#include "gcgs/error.hpp"
#include "gcgs/ot.hpp"
#include "gcgs/solver.hpp"

namespace py = pybind11;
using namespace gcgs;

namespace {

StepRule step_from(const std::string& name) {
  if (const auto rule = parse_step_rule(name)) return *rule;
  throw DomainError("unknown step rule '" + name + "'");
}

py::dict trace_dict(const SolveResult& r) {
  const auto n = static_cast<py::ssize_t>(r.trace.size());
  py::array_t<int> k(n);
  py::array_t<double> objective(n), gap(n), alpha(n), residual(n);
  auto kk = k.mutable_unchecked<1>();
  auto ob = objective.mutable_unchecked<1>();
  auto ga = gap.mutable_unchecked<1>();
  auto al = alpha.mutable_unchecked<1>();
  auto re = residual.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < n; ++i) {
    const auto& rec = r.trace[static_cast<size_t>(i)];
    kk(i) = rec.k;
    ob(i) = rec.objective;
    ga(i) = rec.surrogate_gap;
    al(i) = rec.alpha;
    re(i) = rec.extra_residual.value_or(std::numeric_limits<double>::quiet_NaN());
  }
  py::dict out;
  out["k"] = k;
  out["objective"] = objective;
  out["surrogate_gap"] = gap;
  out["alpha"] = alpha;
  out["residual"] = residual;
  return out;
}

py::dict result_dict(const SolveResult& r) {
  py::dict out;
  out["x"] = r.x;
  out["iterations"] = r.iterations;
  out["termination"] = std::string(to_string(r.termination));
  out["trace"] = trace_dict(r);
  return out;
}

py::dict sinkhorn_py(const Mat& cost, const Vec& a, const Vec& b, double lambda, double tol,
                     int max_iter) {
  ot::SinkhornOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  const auto r = ot::sinkhorn_solve(cost, ot::Histogram(a), ot::Histogram(b), lambda, opts);
  py::dict out;
  out["plan"] = r.plan;
  out["iterations"] = r.iterations;
  out["newton_steps"] = r.newton_steps;
  out["violation"] = r.violation;
  out["log_domain"] = r.log_domain;
  return out;
}

py::dict solve_ot(int ns, int nt, int n_clusters, double noise, std::uint64_t seed,
                  double lambda_ent, double lambda_lap, int k_neighbors,
                  const std::string& solver, const std::string& step, int max_iter,
                  double gap_tol) {
  const auto data = ot::make_cluster_data(ns, nt, n_clusters, noise, seed);
  const ot::TransportObjective obj(ot::make_transport_problem(
      data, {.lambda_ent = lambda_ent, .lambda_lap = lambda_lap, .k_neighbors = k_neighbors}));
  SolverConfig cfg;
  cfg.step_rule = step_from(step);
  cfg.max_iter = max_iter;
  cfg.gap_tol = gap_tol;
  cfg.gap_tol_relative = true;
  SolveResult r;
  {
    py::gil_scoped_release release;
    if (solver == "cgs") {
      r = solve(obj, obj.initial_point(), cfg);
    } else if (solver == "cg") {
      const auto cg = cg_adapter(obj, [&obj](const Vec& d) { return obj.linear_oracle(d); });
      r = solve(cg, obj.initial_point(), cfg);
    } else {
      throw DomainError("solve_ot: solver must be 'cgs' or 'cg'");
    }
  }
  py::dict out = result_dict(r);
  out["plan"] = obj.as_plan(r.x);
  out["cost"] = obj.problem().cost;
  out["marginal_violation"] =
      ot::marginal_violation(obj.as_plan(r.x), obj.problem().mu_s, obj.problem().mu_t);
  return out;
}

py::dict solve_enet(const Mat& Z, const Vec& y, const std::string& loss, double lambda,
                    double tau, const std::string& solver, const std::string& step,
                    int max_iter, double residual_tol, double gap_tol,
                    std::optional<Vec> x0) {
  const auto parsed = enet::parse_loss(loss);
  if (!parsed) throw DomainError("unknown loss '" + loss + "'");
  const enet::ElasticNetProblem problem{.Z = Z, .y = y, .loss = *parsed, .lambda = lambda,
                                        .tau = tau};
  problem.validate();
  const Vec start = x0 ? *x0 : Vec::Zero(Z.cols());
  const auto r = [&] {
    py::gil_scoped_release release;
    if (solver == "spg" || solver == "pg") {
      enet::ProjectedGradientConfig pc;
      pc.max_iter = max_iter;
      pc.residual_tol = residual_tol;
      return solver == "spg" ? enet::spg_solve(problem, start, pc)
                             : enet::pg_solve(problem, start, pc);
    }
    const enet::ElasticNetObjective obj(problem);
    SolverConfig cfg;
    cfg.step_rule = step_from(step);
    cfg.max_iter = max_iter;
    cfg.gap_tol = gap_tol;
    cfg.residual_tol = residual_tol;
    if (solver == "cgs") return solve(obj, start, cfg);
    if (solver == "cg") {
      const auto cg = cg_adapter(obj, [&obj](const Vec& d) { return obj.linear_oracle(d); });
      return solve(cg, start, cfg);
    }
    throw DomainError("solve_enet: solver must be one of cgs, cg, spg, pg");
  }();
  return result_dict(r);
}

py::object run_cli(const std::vector<std::string>& args) {
  const auto outcome = cli::run(cli::parse_config(args));
  py::dict out;
  out["exit_code"] = outcome.exit_code;
  out["summary"] = py::module_::import("json").attr("loads")(outcome.summary.dump());
  out["trace"] = trace_dict(outcome.result);
  return std::move(out);
}

}  // namespace

PYBIND11_MODULE(_gcgs, m) {
  m.doc() = "Conditional gradient splitting solvers.";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<StallError>(m, "StallError", base.ptr());
  py::register_exception<cli::UsageError>(m, "UsageError", base.ptr());

  m.def("sinkhorn", &sinkhorn_py, py::arg("cost"), py::arg("a"), py::arg("b"),
        py::arg("reg"), py::arg("tol") = 1e-9, py::arg("max_iter") = 10000,
        "Entropic transport plan with marginals a, b. Returns a dict with the plan "
        "and convergence details.");
  m.def(
      "transport_lmo",
      [](const Mat& cost, const Vec& a, const Vec& b) {
        return ot::transport_lmo(cost, ot::Histogram(a), ot::Histogram(b));
      },
      py::arg("cost"), py::arg("a"), py::arg("b"), "Exact minimizer of <C, gamma> over the polytope.");
  m.def("project_l1", &enet::project_l1, py::arg("v"), py::arg("tau"));
  m.def(
      "knn_laplacian", &ot::knn_laplacian, py::arg("points"), py::arg("k"));

  m.def("solve_ot", &solve_ot, py::arg("ns") = 100, py::arg("nt") = 100,
        py::arg("n_clusters") = 3, py::arg("noise") = 0.03, py::arg("seed") = 0,
        py::arg("lambda_ent") = 1.7e-2, py::arg("lambda_lap") = 1e3,
        py::arg("k_neighbors") = 10, py::arg("solver") = "cgs", py::arg("step") = "exact",
        py::arg("max_iter") = 500, py::arg("gap_tol") = 1e-6,
        "Regularized transport on synthetic clusters. gap_tol is relative to the first gap.");
  m.def("solve_enet", &solve_enet, py::arg("Z"), py::arg("y"), py::arg("loss") = "logistic",
        py::arg("lambda_") = 0.1, py::arg("tau") = 2.0, py::arg("solver") = "cgs",
        py::arg("step") = "exact", py::arg("max_iter") = 10000, py::arg("residual_tol") = 1e-5,
        py::arg("gap_tol") = 0.0, py::arg("x0") = py::none());
  m.def("run_cli", &run_cli, py::arg("args"),
        "Runs the experiment CLI in-process and returns its summary and trace.");
}
