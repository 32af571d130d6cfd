#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <variant>

#include <CLI11.hpp>

#include "gcgs/cli.hpp"

namespace gcgs::cli {

namespace {

std::optional<Experiment> parse_experiment(std::string_view s) {
  if (s == "ot") return Experiment::ot;
  if (s == "enet") return Experiment::enet;
  return std::nullopt;
}

std::optional<SolverKind> parse_solver(std::string_view s) {
  if (s == "cgs") return SolverKind::cgs;
  if (s == "cg") return SolverKind::cg;
  if (s == "spg") return SolverKind::spg;
  if (s == "pg") return SolverKind::pg;
  return std::nullopt;
}

using Member = std::variant<int RunConfig::*, double RunConfig::*, std::uint64_t RunConfig::*,
                            std::string RunConfig::*, bool RunConfig::*,
                            SolverKind RunConfig::*, StepRule RunConfig::*,
                            enet::Loss RunConfig::*, Experiment RunConfig::*>;

struct Field {
  const char* key;
  Member member;
  const char* help;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"experiment", &RunConfig::experiment, "ot | enet"},
      {"solver", &RunConfig::solver, "cgs | cg | spg | pg"},
      {"step", &RunConfig::step, "exact | armijo | fixed (cgs and cg only)"},
      {"ns", &RunConfig::ns, "source sample count"},
      {"nt", &RunConfig::nt, "target sample count"},
      {"n_clusters", &RunConfig::n_clusters, "clusters per domain"},
      {"noise", &RunConfig::noise, "cluster standard deviation"},
      {"lambda_ent", &RunConfig::lambda_ent, "entropic weight"},
      {"lambda_lap", &RunConfig::lambda_lap, "Laplacian weight"},
      {"k_neighbors", &RunConfig::k_neighbors, "kNN graph degree"},
      {"n_samples", &RunConfig::n_samples, "toy data rows"},
      {"dims", &RunConfig::dims, "toy data features"},
      {"relevant", &RunConfig::relevant, "toy data relevant features"},
      {"loss", &RunConfig::loss, "squared | logistic | squared_hinge"},
      {"lambda", &RunConfig::lambda, "ridge weight"},
      {"tau", &RunConfig::tau, "L1 radius"},
      {"data", &RunConfig::data_path, "CSV dataset instead of toy data"},
      {"label_column", &RunConfig::label_column, "label column name in the CSV"},
      {"seed", &RunConfig::seed, "random seed"},
      {"gap_tol", &RunConfig::gap_tol, "surrogate gap tolerance"},
      {"residual_tol", &RunConfig::residual_tol, "fixed-point residual tolerance (enet)"},
      {"max_iter", &RunConfig::max_iter, "iteration cap"},
      {"out", &RunConfig::out_path, "trace CSV path"},
      {"summary", &RunConfig::summary_path, "summary JSON path"},
      {"plan", &RunConfig::plan_path, "final transport plan CSV (ot)"},
      {"strict", &RunConfig::strict, "nonzero exit when max_iter is hit"},
  };
  return table;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw UsageError("invalid value '" + std::string(value) + "' for '" + std::string(key) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) bad_value(key, text);
  return v;
}

template <typename E>
E parse_enum(std::string_view key, std::string_view text,
             std::optional<E> (*parse)(std::string_view)) {
  auto v = parse(text);
  if (!v) bad_value(key, text);
  return *v;
}

void set_from_text(RunConfig& cfg, const Field& f, const std::string& text) {
  std::visit(
      [&](auto member) {
        using T = std::remove_cvref_t<decltype(cfg.*member)>;
        if constexpr (std::is_same_v<T, std::string>) {
          cfg.*member = text;
        } else if constexpr (std::is_same_v<T, bool>) {
          if (text == "true" || text == "1") {
            cfg.*member = true;
          } else if (text == "false" || text == "0") {
            cfg.*member = false;
          } else {
            bad_value(f.key, text);
          }
        } else if constexpr (std::is_same_v<T, SolverKind>) {
          cfg.*member = parse_enum(f.key, text, &parse_solver);
        } else if constexpr (std::is_same_v<T, StepRule>) {
          cfg.*member = parse_enum(f.key, text, &parse_step_rule);
        } else if constexpr (std::is_same_v<T, enet::Loss>) {
          cfg.*member = parse_enum(f.key, text, &enet::parse_loss);
        } else if constexpr (std::is_same_v<T, Experiment>) {
          cfg.*member = parse_enum(f.key, text, &parse_experiment);
        } else {
          cfg.*member = parse_number<T>(f.key, text);
        }
      },
      f.member);
}

void set_from_json(RunConfig& cfg, const Field& f, const nlohmann::json& v) {
  std::visit(
      [&](auto member) {
        using T = std::remove_cvref_t<decltype(cfg.*member)>;
        if constexpr (std::is_arithmetic_v<T> && !std::is_same_v<T, bool>) {
          if (!v.is_number()) bad_value(f.key, v.dump());
          if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) bad_value(f.key, v.dump());
          }
          cfg.*member = v.get<T>();
        } else if constexpr (std::is_same_v<T, bool>) {
          if (!v.is_boolean()) bad_value(f.key, v.dump());
          cfg.*member = v.get<bool>();
        } else {
          if (!v.is_string()) bad_value(f.key, v.dump());
          set_from_text(cfg, f, v.get<std::string>());
        }
      },
      f.member);
}

nlohmann::json field_to_json(const RunConfig& cfg, const Field& f) {
  return std::visit(
      [&](auto member) -> nlohmann::json {
        using T = std::remove_cvref_t<decltype(cfg.*member)>;
        if constexpr (std::is_enum_v<T>) {
          if constexpr (std::is_same_v<T, enet::Loss>) {
            return std::string(enet::to_string(cfg.*member));
          } else if constexpr (std::is_same_v<T, StepRule>) {
            return std::string(gcgs::to_string(cfg.*member));
          } else {
            return std::string(cli::to_string(cfg.*member));
          }
        } else {
          return cfg.*member;
        }
      },
      f.member);
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

RunConfig defaults_for(Experiment e) {
  RunConfig cfg;
  cfg.experiment = e;
  if (e == Experiment::enet) {
    cfg.gap_tol = 0.0;
    cfg.max_iter = 10000;
  }
  return cfg;
}

void validate(const RunConfig& cfg) {
  if (cfg.experiment == Experiment::ot &&
      (cfg.solver == SolverKind::spg || cfg.solver == SolverKind::pg)) {
    throw UsageError("solver '" + std::string(to_string(cfg.solver)) +
                     "' is only available for the enet experiment");
  }
  if (cfg.max_iter < 1) throw UsageError("max_iter must be >= 1");
  if (!(cfg.gap_tol >= 0.0)) throw UsageError("gap_tol must be >= 0");
  if (!(cfg.residual_tol >= 0.0)) throw UsageError("residual_tol must be >= 0");
}

}  // namespace

std::string_view to_string(Experiment e) { return e == Experiment::ot ? "ot" : "enet"; }

std::string_view to_string(SolverKind s) {
  switch (s) {
    case SolverKind::cgs: return "cgs";
    case SolverKind::cg: return "cg";
    case SolverKind::spg: return "spg";
    case SolverKind::pg: return "pg";
  }
  return "?";
}

void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    const Field* f = find_field(key);
    if (!f) throw UsageError("unknown config key '" + key + "'");
    set_from_json(cfg, *f, value);
  }
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : fields()) j[f.key] = field_to_json(cfg, f);
  return j;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"generalized conditional gradient experiments", "gcgs"};
  std::string experiment;
  std::string experiment_flag;
  std::string config_path;
  app.add_option("EXPERIMENT", experiment, "ot | enet");
  app.add_option("--experiment", experiment_flag, "ot | enet (alternative to the positional)");
  app.add_option("--config", config_path, "JSON file with default values");

  std::map<std::string, std::string> text;
  std::map<std::string, CLI::Option*> opts;
  for (const auto& f : fields()) {
    if (std::string_view(f.key) == "experiment") continue;
    const std::string flag = "--" + std::string(f.key);
    if (std::holds_alternative<bool RunConfig::*>(f.member)) {
      opts[f.key] = app.add_flag(flag, f.help);
    } else {
      opts[f.key] = app.add_option(flag, text[f.key], f.help);
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (experiment.empty()) {
    experiment = experiment_flag;
  } else if (!experiment_flag.empty() && experiment_flag != experiment) {
    throw UsageError("conflicting experiments '" + experiment + "' and '" + experiment_flag + "'");
  }
  if (experiment.empty()) throw UsageError("missing experiment (ot or enet)");
  const auto exp = parse_experiment(experiment);
  if (!exp) throw UsageError("unknown experiment '" + experiment + "' (expected ot or enet)");
  RunConfig cfg = defaults_for(*exp);

  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw UsageError("cannot open config file '" + config_path + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("config file '" + config_path + "': " + e.what());
    }
    apply_json(cfg, j);
    if (cfg.experiment != *exp) {
      throw UsageError("config file experiment does not match '" + experiment + "'");
    }
  }

  for (const auto& f : fields()) {
    auto it = opts.find(f.key);
    if (it == opts.end() || it->second->count() == 0) continue;
    if (std::holds_alternative<bool RunConfig::*>(f.member)) {
      cfg.*std::get<bool RunConfig::*>(f.member) = true;
    } else {
      set_from_text(cfg, f, text[f.key]);
    }
  }
  validate(cfg);
  return cfg;
}

}  // namespace gcgs::cli
