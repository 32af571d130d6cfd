#include <charconv>
#include <fstream>

#include "gcgs/cli.hpp"
#include "gcgs/ot.hpp"

namespace gcgs::cli {

namespace {

void put_number(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

nlohmann::json base_summary(const RunConfig& cfg, const SolveResult& r) {
  const IterationRecord& last = r.trace.back();
  nlohmann::json s;
  s["experiment"] = std::string(to_string(cfg.experiment));
  s["solver"] = std::string(to_string(cfg.solver));
  s["termination"] = std::string(gcgs::to_string(r.termination));
  s["iterations"] = r.iterations;
  s["final_objective"] = last.objective;
  s["final_gap"] = last.surrogate_gap;
  if (last.extra_residual) s["final_residual"] = *last.extra_residual;
  s["config"] = to_json(cfg);
  return s;
}

void emit(const RunConfig& cfg, const RunOutcome& outcome, std::string_view residual_column) {
  if (!cfg.out_path.empty()) {
    std::ofstream out(cfg.out_path, std::ios::binary);
    if (!out) throw Error("cannot open " + cfg.out_path + " for writing");
    write_trace_csv(out, outcome.result.trace, residual_column);
  }
  if (!cfg.summary_path.empty()) {
    std::ofstream out(cfg.summary_path, std::ios::binary);
    if (!out) throw Error("cannot open " + cfg.summary_path + " for writing");
    out << outcome.summary.dump(2) << '\n';
  }
}

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig sc;
  sc.step_rule = cfg.step;
  sc.max_iter = cfg.max_iter;
  sc.gap_tol = cfg.gap_tol;
  sc.seed = cfg.seed;
  return sc;
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace,
                     std::string_view residual_column) {
  out << "iter,elapsed_s,objective,surrogate_gap,step_alpha," << residual_column << '\n';
  for (const auto& rec : trace) {
    out << rec.k << ',';
    put_number(out, rec.elapsed_s);
    out << ',';
    put_number(out, rec.objective);
    out << ',';
    put_number(out, rec.surrogate_gap);
    out << ',';
    put_number(out, rec.alpha);
    out << ',';
    if (rec.extra_residual) put_number(out, *rec.extra_residual);
    out << '\n';
  }
}

int exit_code_for(Termination t, bool strict) {
  switch (t) {
    case Termination::gap_tol:
    case Termination::residual_tol:
      return 0;
    case Termination::max_iter:
      return strict ? 3 : 0;
    case Termination::stalled:
      return 4;
  }
  return 1;
}

RunOutcome run_ot(const RunConfig& cfg) {
  const auto data = ot::make_cluster_data(cfg.ns, cfg.nt, cfg.n_clusters, cfg.noise, cfg.seed);
  ot::TransportObjective obj(ot::make_transport_problem(
      data, {.lambda_ent = cfg.lambda_ent,
             .lambda_lap = cfg.lambda_lap,
             .k_neighbors = cfg.k_neighbors}));

  SolverConfig sc = solver_config(cfg);
  sc.gap_tol_relative = true;
  const Vec x0 = obj.initial_point();

  RunOutcome outcome;
  switch (cfg.solver) {
    case SolverKind::cgs:
      outcome.result = solve(obj, x0, sc);
      break;
    case SolverKind::cg: {
      const auto adapter =
          cg_adapter(obj, [&obj](const Vec& grad) { return obj.linear_oracle(grad); });
      outcome.result = solve(adapter, x0, sc);
      break;
    }
    default:
      throw UsageError("solver not available for ot");
  }

  outcome.summary = base_summary(cfg, outcome.result);
  outcome.exit_code = exit_code_for(outcome.result.termination, cfg.strict);
  emit(cfg, outcome, "marginal_violation");
  if (!cfg.plan_path.empty()) ot::write_matrix_csv(cfg.plan_path, obj.as_plan(outcome.result.x));
  return outcome;
}

RunOutcome run_enet(const RunConfig& cfg) {
  const enet::Dataset data =
      cfg.data_path.empty()
          ? enet::make_toy_classification(cfg.n_samples, cfg.dims, cfg.relevant, cfg.seed)
          : enet::load_csv_dataset(cfg.data_path, cfg.label_column);
  enet::ElasticNetProblem problem{
      .Z = data.train_Z(), .y = data.train_y(), .loss = cfg.loss, .lambda = cfg.lambda,
      .tau = cfg.tau};
  const enet::ElasticNetObjective obj(problem);
  const Vec x0 = Vec::Zero(problem.Z.cols());

  SolverConfig sc = solver_config(cfg);
  sc.residual_tol = cfg.residual_tol;
  enet::ProjectedGradientConfig pc;
  pc.max_iter = cfg.max_iter;
  pc.residual_tol = cfg.residual_tol;

  RunOutcome outcome;
  switch (cfg.solver) {
    case SolverKind::cgs:
      outcome.result = solve(obj, x0, sc);
      break;
    case SolverKind::cg: {
      const auto adapter =
          cg_adapter(obj, [&obj](const Vec& grad) { return obj.linear_oracle(grad); });
      outcome.result = solve(adapter, x0, sc);
      break;
    }
    case SolverKind::spg:
      outcome.result = enet::spg_solve(problem, x0, pc);
      break;
    case SolverKind::pg:
      outcome.result = enet::pg_solve(problem, x0, pc);
      break;
  }

  outcome.summary = base_summary(cfg, outcome.result);
  outcome.summary["train_accuracy"] =
      enet::accuracy(data.train_Z(), data.train_y(), outcome.result.x);
  if (data.Z.rows() > data.n_train && cfg.loss != enet::Loss::squared) {
    outcome.summary["test_accuracy"] =
        enet::accuracy(data.test_Z(), data.test_y(), outcome.result.x);
  }
  outcome.exit_code = exit_code_for(outcome.result.termination, cfg.strict);
  emit(cfg, outcome, "fp_residual");
  return outcome;
}

RunOutcome run(const RunConfig& cfg) {
  return cfg.experiment == Experiment::ot ? run_ot(cfg) : run_enet(cfg);
}

}  // namespace gcgs::cli
