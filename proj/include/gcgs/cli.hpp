#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gcgs/elasticnet.hpp"
#include "gcgs/error.hpp"
#include "gcgs/solver.hpp"

namespace gcgs::cli {

class UsageError : public Error {
public:
  using Error::Error;
};

/// Thrown by parse_config for --help; what() holds the help text.
class HelpRequested : public Error {
public:
  using Error::Error;
};

enum class Experiment { ot, enet };
enum class SolverKind { cgs, cg, spg, pg };

std::string_view to_string(Experiment e);
std::string_view to_string(SolverKind s);

struct RunConfig {
  Experiment experiment = Experiment::ot;
  SolverKind solver = SolverKind::cgs;
  StepRule step = StepRule::exact;

  // transport
  int ns = 100;
  int nt = 100;
  int n_clusters = 3;
  double noise = 0.03;
  double lambda_ent = 1.7e-2;
  double lambda_lap = 1e3;
  int k_neighbors = 10;

  // elastic-net
  int n_samples = 200;
  int dims = 100;
  int relevant = 10;
  enet::Loss loss = enet::Loss::logistic;
  double lambda = 0.1;
  double tau = 2.0;
  std::string data_path;
  std::string label_column = "label";

  std::uint64_t seed = 0;
  /// Transport runs: relative to the initial gap. Elastic-net: absolute,
  /// 0 disables it so the fixed-point residual decides.
  double gap_tol = 1e-6;
  double residual_tol = 1e-5;
  int max_iter = 500;

  std::string out_path;
  std::string summary_path;
  std::string plan_path;
  bool strict = false;
};

/// Parses `<ot|enet> [flags] [--config file.json]`. Values from the JSON file
/// are applied first and flags override them. Unknown flags or keys throw
/// UsageError naming the offender.
RunConfig parse_config(const std::vector<std::string>& args);

/// Applies a JSON object of RunConfig keys; throws UsageError on unknown keys.
void apply_json(RunConfig& cfg, const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

struct RunOutcome {
  SolveResult result;
  nlohmann::json summary;
  int exit_code = 0;
};

RunOutcome run_ot(const RunConfig& cfg);
RunOutcome run_enet(const RunConfig& cfg);
RunOutcome run(const RunConfig& cfg);

/// Header `iter,elapsed_s,objective,surrogate_gap,step_alpha,<residual_column>`,
/// one row per record, shortest round-trip number formatting, LF endings.
void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace,
                     std::string_view residual_column);

/// 0 for gap_tol / fp_residual; max_iter is 0 unless strict; stalled is 4.
int exit_code_for(Termination t, bool strict);

}  // namespace gcgs::cli
