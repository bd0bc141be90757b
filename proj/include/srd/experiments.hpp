#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "srd/config.hpp"
#include "srd/csv.hpp"
#include "srd/estimators.hpp"
#include "srd/model.hpp"
#include "srd/oracle.hpp"

namespace srd {

enum class Command { Estimate, Gradient, Compare, Convergence, ReplicateFigure };

std::optional<Command> parse_command(const std::string& name);
const char* command_name(Command c);

// Plugin hook: factories registered here are selected with
// `constraint = plugin` / `model = plugin` and `*.plugin = <id>`. They may
// read any keys under `plugin.`.
using ConstraintPlugin = std::function<Constraint(const Config& cfg, int n, int m)>;
using ModelPlugin = std::function<ParameterModel(const Config& cfg)>;
void register_constraint_plugin(const std::string& id, ConstraintPlugin factory);
void register_model_plugin(const std::string& id, ModelPlugin factory);

// Built-in finite-mixture half-space example (m = 2, n = 2); the same
// numbers ship in configs/mixture_halfspace.cfg.
struct HalfspaceExample {
  FiniteMixture mixture;
  std::vector<double> a, b;
  double beta = 0.0;
};
HalfspaceExample mixture_halfspace_example();

enum class OracleKind { None, Example, Halfspace, Reference2d };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
};

// A fully validated experiment. Building one reads every key it needs
// and rejects the rest.
struct Experiment {
  Command command = Command::Estimate;
  std::string model_kind;
  std::string constraint_kind;
  std::shared_ptr<const ParameterModel> model;
  Constraint constraint;
  double delta = 0.0;                   // beta-example
  std::optional<FiniteMixture> mixture; // finite-mixture
  std::vector<double> halfspace_a, halfspace_b;
  double halfspace_beta = 0.0;

  std::vector<std::vector<double>> grid;
  SamplePlan plan;
  EvalOptions eval;
  bool crn = true;
  bool naive = false;
  OracleKind oracle = OracleKind::None;
  QuadratureSpec quadrature;
  double fd_step = 1e-5;

  std::vector<std::size_t> sizes;  // convergence ladder
  std::size_t replications = 0;

  int decision_dimension() const { return constraint.decision_dimension; }
};

Experiment build_experiment(Command command, const Config& cfg, const Overrides& overrides = {});

// Ground truth for the configured oracle; empty when unavailable.
std::optional<double> oracle_probability(const Experiment& ex, const std::vector<double>& x);
std::optional<std::vector<double>> oracle_gradient(const Experiment& ex, const std::vector<double>& x);

struct ResultRow {
  std::vector<double> x;
  double phi_hat = 0.0;
  double phi_stderr = 0.0;
  std::vector<double> grad_hat;
  std::vector<double> grad_stderr;
  std::optional<double> phi_true;
  std::optional<std::vector<double>> grad_true;
  std::optional<double> naive_hat;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

extern const std::vector<std::string> kResultColumns;
CsvTable result_table(const std::vector<ResultRow>& rows);

struct ExperimentOutput {
  CsvTable table;
  std::string svg;                    // replicate-figure only
  std::vector<std::string> diagnostics;  // lines for the diagnostic stream
};

std::vector<ResultRow> run_estimate_rows(const Experiment& ex, std::vector<std::string>* diagnostics = nullptr);
ExperimentOutput run_estimate(const Experiment& ex);
ExperimentOutput run_gradient(const Experiment& ex);
ExperimentOutput run_compare(const Experiment& ex);
ExperimentOutput run_convergence(const Experiment& ex);
ExperimentOutput run_replicate_figure(const Experiment& ex);
ExperimentOutput run_experiment(const Experiment& ex);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace srd
