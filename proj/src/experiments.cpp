#include "srd/experiments.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "srd/errors.hpp"
#include "srd/svg.hpp"

namespace srd {
namespace {

struct Registry {
  std::mutex mutex;
  std::map<std::string, ConstraintPlugin> constraints;
  std::map<std::string, ModelPlugin> models;
};

Registry& registry() {
  static Registry r;
  return r;
}

std::size_t positive_count(const Config& cfg, const std::string& key, std::optional<std::int64_t> fallback) {
  const std::int64_t v = fallback ? cfg.get_int(key, *fallback) : cfg.get_int(key);
  if (v < 1) throw ConfigError(key + ": must be >= 1");
  return static_cast<std::size_t>(v);
}

std::string format_x(const std::vector<double>& x) { return format_vector(x); }

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string optional_cell(const std::optional<std::vector<double>>& v) {
  return v ? format_vector(*v) : std::string();
}

std::uint64_t point_seed(const Experiment& ex, std::size_t k) {
  return ex.crn ? ex.plan.seed : derived_seed(ex.plan.seed, k);
}

void note_slater(const ProbabilityEstimate& p, const std::vector<double>& x, std::vector<std::string>* out) {
  if (out && p.verified_slater && !*p.verified_slater) {
    out->push_back("warning: Slater margin not verified at x=" + format_x(x) + "; estimate is unverified");
  }
}

Constraint build_constraint(const Config& cfg, Experiment& ex, int m) {
  ex.constraint_kind = cfg.get_string("constraint");
  const std::string& kind = ex.constraint_kind;
  if (kind == "ball") {
    const int n = static_cast<int>(positive_count(cfg, "decision.dimension", 1));
    return ball_constraint(n, m, cfg.get_double("constraint.offset"));
  }
  if (kind == "halfspace") {
    ex.halfspace_a = cfg.get_vector("constraint.a");
    ex.halfspace_b = cfg.get_vector("constraint.b");
    ex.halfspace_beta = cfg.get_double("constraint.beta");
    if (static_cast<int>(ex.halfspace_a.size()) != m) {
      throw ConfigError("constraint.a has " + std::to_string(ex.halfspace_a.size()) +
                        " entries but the model dimension is " + std::to_string(m));
    }
    if (cfg.has("decision.dimension") &&
        positive_count(cfg, "decision.dimension", std::nullopt) != ex.halfspace_b.size()) {
      throw ConfigError("decision.dimension does not match the length of constraint.b");
    }
    return halfspace_constraint(ex.halfspace_a, ex.halfspace_b, ex.halfspace_beta);
  }
  if (kind == "constant") {
    const int n = static_cast<int>(positive_count(cfg, "decision.dimension", 1));
    return constant_constraint(n, m, cfg.get_double("constraint.level"));
  }
  if (kind == "plugin") {
    const std::string id = cfg.get_string("constraint.plugin");
    const int n = static_cast<int>(positive_count(cfg, "decision.dimension", std::nullopt));
    ConstraintPlugin factory;
    {
      std::lock_guard lock(registry().mutex);
      const auto it = registry().constraints.find(id);
      if (it == registry().constraints.end()) throw ConfigError("unknown constraint plugin '" + id + "'");
      factory = it->second;
    }
    Constraint c = factory(cfg, n, m);
    if (c.decision_dimension != n) throw ConfigError("constraint plugin '" + id + "' returned the wrong x dimension");
    return c;
  }
  throw ConfigError("constraint: unknown kind '" + kind + "' (expected ball, halfspace, constant or plugin)");
}

std::shared_ptr<const ParameterModel> build_model(const Config& cfg, Experiment& ex) {
  ex.model_kind = cfg.get_string("model");
  const std::string& kind = ex.model_kind;
  if (kind == "beta-example") {
    ex.delta = cfg.get_double("model.delta");
    if (!(ex.delta > 0.0)) throw ConfigError("model.delta must be > 0");
    return std::make_shared<ParameterModel>(beta_example_model(ex.delta));
  }
  if (kind == "finite-mixture") {
    FiniteMixture mix;
    mix.weights = cfg.get_vector("mixture.weights");
    for (std::size_t k = 0; k < mix.weights.size(); ++k) {
      const std::string prefix = "mixture." + std::to_string(k) + ".";
      GaussianParams comp;
      comp.mean = cfg.get_vector(prefix + "mean");
      try {
        comp.chol = CholeskyFactor(cfg.get_matrix(prefix + "chol"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(prefix + "chol: " + e.what());
      }
      if (comp.chol.dim() != comp.dim()) {
        throw ConfigError(prefix + "chol: factor size does not match the mean length");
      }
      mix.components.push_back(std::move(comp));
    }
    mix.validate();
    ex.mixture = mix;
    return std::make_shared<ParameterModel>(mixture_as_parameter_model(mix));
  }
  if (kind == "plugin") {
    const std::string id = cfg.get_string("model.plugin");
    ModelPlugin factory;
    {
      std::lock_guard lock(registry().mutex);
      const auto it = registry().models.find(id);
      if (it == registry().models.end()) throw ConfigError("unknown model plugin '" + id + "'");
      factory = it->second;
    }
    return std::make_shared<ParameterModel>(factory(cfg));
  }
  throw ConfigError("model: unknown kind '" + kind + "' (expected beta-example, finite-mixture or plugin)");
}

std::vector<std::vector<double>> build_grid(const Config& cfg, const Experiment& ex) {
  const int n = ex.decision_dimension();
  std::vector<std::vector<double>> grid;
  if (cfg.has("grid.points")) {
    grid = cfg.get_matrix("grid.points");
  } else if (cfg.has("grid.start") || ex.command == Command::ReplicateFigure) {
    const bool figure_default = !cfg.has("grid.start");
    const double start = figure_default ? 0.0 : cfg.get_double("grid.start");
    const double stop = figure_default ? 4.0 : cfg.get_double("grid.stop");
    const double step = figure_default ? 0.05 : cfg.get_double("grid.step");
    if (!(step > 0.0) || stop < start) throw ConfigError("grid: need step > 0 and stop >= start");
    std::vector<double> direction(1, 1.0);
    if (cfg.has("grid.direction") || n != 1) direction = cfg.get_vector("grid.direction");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) {
      const double t = start + static_cast<double>(k) * step;
      std::vector<double> x(direction.size());
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = t * direction[i];
      grid.push_back(std::move(x));
    }
  } else {
    throw ConfigError("missing grid: set grid.points or grid.start/grid.stop/grid.step");
  }
  for (const auto& x : grid) {
    if (static_cast<int>(x.size()) != n) {
      throw ConfigError("grid point " + format_x(x) + " has dimension " + std::to_string(x.size()) +
                        " but the constraint expects " + std::to_string(n));
    }
  }
  return grid;
}

OracleKind resolve_oracle(const Config& cfg, const Experiment& ex) {
  const ParameterModel& model = *ex.model;
  const bool example_ok = ex.model_kind == "beta-example" && ex.constraint.ball && ex.constraint.ball->offset == 2.0;
  const bool halfspace_ok = ex.model_kind == "finite-mixture" && ex.constraint_kind == "halfspace";
  const bool reference_ok = model.dimension() == 2 && model.parameter_dimension() == 1 &&
                            (model.is_discrete() || (model.support() && model.has_density()));
  const std::string choice = cfg.get_string("oracle", "auto");
  if (choice == "none") return OracleKind::None;
  if (choice == "auto") {
    if (example_ok) return OracleKind::Example;
    if (halfspace_ok) return OracleKind::Halfspace;
    if (reference_ok) return OracleKind::Reference2d;
    return OracleKind::None;
  }
  if (choice == "example") {
    if (!example_ok) throw ConfigError("oracle=example needs model=beta-example with a ball constraint of offset 2");
    return OracleKind::Example;
  }
  if (choice == "halfspace") {
    if (!halfspace_ok) throw ConfigError("oracle=halfspace needs model=finite-mixture with constraint=halfspace");
    return OracleKind::Halfspace;
  }
  if (choice == "reference") {
    if (!reference_ok) throw ConfigError("oracle=reference needs m = 2 and a scalar parameter with known prior");
    return OracleKind::Reference2d;
  }
  throw ConfigError("oracle: unknown value '" + choice + "' (expected auto, none, example, halfspace or reference)");
}

}  // namespace

std::optional<Command> parse_command(const std::string& name) {
  if (name == "estimate") return Command::Estimate;
  if (name == "gradient") return Command::Gradient;
  if (name == "compare") return Command::Compare;
  if (name == "convergence") return Command::Convergence;
  if (name == "replicate-figure") return Command::ReplicateFigure;
  return std::nullopt;
}

const char* command_name(Command c) {
  switch (c) {
    case Command::Estimate: return "estimate";
    case Command::Gradient: return "gradient";
    case Command::Compare: return "compare";
    case Command::Convergence: return "convergence";
    case Command::ReplicateFigure: return "replicate-figure";
  }
  return "?";
}

HalfspaceExample mixture_halfspace_example() {
  HalfspaceExample ex;
  ex.mixture.weights = {0.3, 0.45, 0.25};
  ex.mixture.components.push_back({{0.5, -0.2}, CholeskyFactor({{1.0, 0.0}, {0.3, 0.8}})});
  ex.mixture.components.push_back({{-0.4, 0.6}, CholeskyFactor({{0.7, 0.0}, {-0.2, 1.1}})});
  ex.mixture.components.push_back({{0.1, 0.9}, CholeskyFactor({{0.6, 0.0}, {0.0, 0.6}})});
  ex.a = {1.0, 0.5};
  ex.b = {0.8, -0.3};
  ex.beta = 2.0;
  return ex;
}

void register_constraint_plugin(const std::string& id, ConstraintPlugin factory) {
  std::lock_guard lock(registry().mutex);
  registry().constraints[id] = std::move(factory);
}

void register_model_plugin(const std::string& id, ModelPlugin factory) {
  std::lock_guard lock(registry().mutex);
  registry().models[id] = std::move(factory);
}

Experiment build_experiment(Command command, const Config& cfg, const Overrides& overrides) {
  Experiment ex;
  ex.command = command;
  ex.model = build_model(cfg, ex);
  const int m = ex.model->dimension();
  ex.constraint = build_constraint(cfg, ex, m);
  if (ex.constraint.random_dimension != m) {
    throw ConfigError("constraint expects z in R^" + std::to_string(ex.constraint.random_dimension) +
                      " but the model has dimension " + std::to_string(m));
  }
  ex.grid = build_grid(cfg, ex);

  const std::uint64_t seed = cfg.get_u64("seed", 0);
  ex.plan.seed = overrides.seed.value_or(seed);
  const auto workers = static_cast<unsigned>(positive_count(cfg, "workers", 1));
  ex.eval.workers = overrides.workers.value_or(workers);
  if (ex.eval.workers < 1) throw ConfigError("workers must be >= 1");

  const std::string path = cfg.get_string("path", "auto");
  if (path == "auto") {
    ex.eval.path = EvalPath::Auto;
  } else if (path == "generic") {
    ex.eval.path = EvalPath::Generic;
  } else {
    throw ConfigError("path: expected auto or generic, got '" + path + "'");
  }
  if (cfg.has("slater.gamma0")) {
    ex.eval.slater_gamma0 = cfg.get_double("slater.gamma0");
    if (!(*ex.eval.slater_gamma0 > 0.0)) throw ConfigError("slater.gamma0 must be > 0");
  }

  if (command == Command::Convergence) {
    for (double s : cfg.get_vector("convergence.sizes")) {
      if (!(s >= 2.0) || s != std::floor(s)) throw ConfigError("convergence.sizes: entries must be integers >= 2");
      ex.sizes.push_back(static_cast<std::size_t>(s));
    }
    ex.replications = positive_count(cfg, "convergence.replications", std::nullopt);
    if (ex.replications < 2) throw ConfigError("convergence.replications must be >= 2");
  } else {
    ex.plan.count = positive_count(cfg, "samples", command == Command::ReplicateFigure ? std::optional<std::int64_t>(100)
                                                                                      : std::nullopt);
  }

  if (command != Command::Compare) {
    const std::string sampler = cfg.get_string("sampler", "iid");
    if (sampler == "mcmc") {
      McmcOptions mcmc;
      mcmc.proposal_scale = cfg.get_double("mcmc.proposal_scale", 0.0);
      mcmc.burn_in = static_cast<std::size_t>(cfg.get_int("mcmc.burn_in", 1000));
      mcmc.thinning = positive_count(cfg, "mcmc.thinning", 1);
      if (mcmc.proposal_scale < 0.0) throw ConfigError("mcmc.proposal_scale must be >= 0");
      if (cfg.get_int("mcmc.burn_in", 1000) < 0) throw ConfigError("mcmc.burn_in must be >= 0");
      ex.plan.mcmc = mcmc;
    } else if (sampler != "iid") {
      throw ConfigError("sampler: expected iid or mcmc, got '" + sampler + "'");
    }
  }
  if (command != Command::Convergence && command != Command::ReplicateFigure) ex.crn = cfg.get_bool("crn", true);
  if (command == Command::Estimate) ex.naive = cfg.get_bool("naive", false);
  if (command == Command::Gradient) {
    ex.fd_step = cfg.get_double("fd.step", 1e-5);
    if (!(ex.fd_step > 0.0)) throw ConfigError("fd.step must be > 0");
  }

  ex.oracle = resolve_oracle(cfg, ex);
  ex.quadrature.nodes = static_cast<int>(cfg.get_int("oracle.nodes", ex.quadrature.nodes));
  ex.quadrature.max_doublings = static_cast<int>(cfg.get_int("oracle.max_doublings", ex.quadrature.max_doublings));
  ex.quadrature.tolerance = cfg.get_double("oracle.tolerance", ex.quadrature.tolerance);
  ex.quadrature.validate();

  if (command == Command::Convergence && ex.oracle == OracleKind::None) {
    throw ConfigError("convergence needs an oracle for the configured model");
  }
  if (command == Command::ReplicateFigure) {
    if (ex.oracle != OracleKind::Example) {
      throw ConfigError("replicate-figure needs model=beta-example with constraint=ball and constraint.offset=2");
    }
    if (ex.decision_dimension() != 1) throw ConfigError("replicate-figure needs decision.dimension = 1");
  }

  cfg.reject_unused();
  return ex;
}

std::optional<double> oracle_probability(const Experiment& ex, const std::vector<double>& x) {
  switch (ex.oracle) {
    case OracleKind::None: return std::nullopt;
    case OracleKind::Example: return true_probability_example(x, ex.delta, ex.quadrature).value;
    case OracleKind::Halfspace:
      return halfspace_mixture_probability(ex.halfspace_a, ex.halfspace_b, ex.halfspace_beta, *ex.mixture, x);
    case OracleKind::Reference2d:
      return reference_probability_2d(ex.constraint, *ex.model, x, ex.quadrature, ex.eval.radius).phi;
  }
  return std::nullopt;
}

std::optional<std::vector<double>> oracle_gradient(const Experiment& ex, const std::vector<double>& x) {
  switch (ex.oracle) {
    case OracleKind::Example: return true_gradient_example(x, ex.delta, ex.quadrature).value;
    case OracleKind::Halfspace:
      return halfspace_mixture_gradient(ex.halfspace_a, ex.halfspace_b, ex.halfspace_beta, *ex.mixture, x);
    default: return std::nullopt;
  }
}

const std::vector<std::string> kResultColumns = {"x",         "phi_hat",   "phi_stderr", "grad_hat", "grad_stderr",
                                                  "phi_true",  "grad_true", "naive_hat",  "n",        "seed"};

CsvTable result_table(const std::vector<ResultRow>& rows) {
  CsvTable table(kResultColumns);
  for (const auto& r : rows) {
    table.add_row({format_x(r.x), format_double(r.phi_hat), format_double(r.phi_stderr), format_vector(r.grad_hat),
                   format_vector(r.grad_stderr), optional_cell(r.phi_true), optional_cell(r.grad_true),
                   optional_cell(r.naive_hat), std::to_string(r.n), std::to_string(r.seed)});
  }
  return table;
}

std::vector<ResultRow> run_estimate_rows(const Experiment& ex, std::vector<std::string>* diagnostics) {
  const std::vector<SweepRow> sw = sweep(ex.constraint, *ex.model, ex.grid, ex.plan, ex.crn, ex.eval);
  std::optional<NaiveEvaluator> shared_naive;
  if (ex.naive && ex.crn) shared_naive.emplace(ex.constraint, *ex.model, ex.plan.count, ex.plan.seed, ex.eval.workers);

  std::vector<ResultRow> rows;
  for (const auto& s : sw) {
    note_slater(s.probability, s.x, diagnostics);
    ResultRow r;
    r.x = s.x;
    r.phi_hat = s.probability.value;
    r.phi_stderr = s.probability.std_error;
    r.grad_hat = s.gradient.value;
    r.grad_stderr = s.gradient.std_error;
    r.phi_true = oracle_probability(ex, s.x);
    r.grad_true = oracle_gradient(ex, s.x);
    if (ex.naive) {
      r.naive_hat = shared_naive ? shared_naive->probability(s.x).value
                                 : NaiveEvaluator(ex.constraint, *ex.model, ex.plan.count, s.seed, ex.eval.workers)
                                       .probability(s.x)
                                       .value;
    }
    r.n = s.probability.n;
    r.seed = s.seed;
    rows.push_back(std::move(r));
  }
  return rows;
}

ExperimentOutput run_estimate(const Experiment& ex) {
  ExperimentOutput out{CsvTable(kResultColumns), {}, {}};
  out.table = result_table(run_estimate_rows(ex, &out.diagnostics));
  return out;
}

ExperimentOutput run_gradient(const Experiment& ex) {
  ExperimentOutput out{CsvTable({"x", "grad_hat", "grad_stderr", "grad_true", "grad_fd", "n", "seed"}), {}, {}};
  std::optional<SampleSet> set;
  std::optional<SphericalEvaluator> eval;
  for (std::size_t k = 0; k < ex.grid.size(); ++k) {
    const auto& x = ex.grid[k];
    SamplePlan plan = ex.plan;
    plan.seed = point_seed(ex, k);
    if (!eval || !ex.crn) {
      eval.reset();
      set = generate_samples(*ex.model, plan);
      eval.emplace(ex.constraint, *ex.model, set->samples, ex.eval);
    }
    const SphericalEstimate est = eval->evaluate(x);
    note_slater(est.probability, x, &out.diagnostics);
    const auto fd = finite_difference_gradient(
        [&](std::span<const double> p) { return eval->probability(p).value; }, x, ex.fd_step);
    out.table.add_row({format_x(x), format_vector(est.gradient.value), format_vector(est.gradient.std_error),
                       optional_cell(oracle_gradient(ex, x)), format_vector(fd), std::to_string(est.gradient.n),
                       std::to_string(plan.seed)});
  }
  return out;
}

ExperimentOutput run_compare(const Experiment& ex) {
  ExperimentOutput out{CsvTable({"x", "spherical_hat", "spherical_var", "spherical_stderr", "naive_hat", "naive_var",
                                 "naive_stderr", "combined_stderr", "dominance", "phi_true",
                                 "spherical_sec_per_sample", "naive_sec_per_sample", "n", "seed"}),
                       {},
                       {}};
  using clock = std::chrono::steady_clock;
  const std::size_t count = ex.plan.count;
  if (count < 2) throw ConfigError("compare needs samples >= 2");
  std::vector<double> e(count);
  for (std::size_t k = 0; k < ex.grid.size(); ++k) {
    const auto& x = ex.grid[k];
    const std::uint64_t seed = point_seed(ex, k);
    const VarianceComparison vc = variance_comparison(ex.constraint, *ex.model, x, count, seed, ex.eval);

    const std::vector<RadialSample> samples = draw_samples(*ex.model, SamplePlan{count, seed, std::nullopt});
    const SphericalEvaluator sph(ex.constraint, *ex.model, samples, ex.eval);
    const NaiveEvaluator naive(ex.constraint, *ex.model, count, seed, ex.eval.workers);
    const auto t0 = clock::now();
    sph.kernel_values(x, e, nullptr);
    const auto t1 = clock::now();
    naive.probability(x);
    const auto t2 = clock::now();
    const double n = static_cast<double>(count);
    out.table.add_row({format_x(x), format_double(vc.spherical.value), format_double(vc.sigma2_spherical),
                       format_double(vc.spherical.std_error), format_double(vc.naive.value),
                       format_double(vc.sigma2_naive), format_double(vc.naive.std_error),
                       format_double(vc.combined_stderr), vc.dominance ? "true" : "false",
                       optional_cell(oracle_probability(ex, x)),
                       format_double(std::chrono::duration<double>(t1 - t0).count() / n),
                       format_double(std::chrono::duration<double>(t2 - t1).count() / n), std::to_string(count),
                       std::to_string(seed)});
  }
  return out;
}

ExperimentOutput run_convergence(const Experiment& ex) {
  ExperimentOutput out{CsvTable({"n", "x", "replications", "rmse_phi", "rmse_grad", "coverage", "variance_ratio",
                                 "seed"}),
                       {},
                       {}};
  const std::size_t points = ex.grid.size();
  std::vector<double> phi_true(points);
  std::vector<std::optional<std::vector<double>>> grad_true(points);
  for (std::size_t k = 0; k < points; ++k) {
    phi_true[k] = *oracle_probability(ex, ex.grid[k]);
    grad_true[k] = oracle_gradient(ex, ex.grid[k]);
  }

  for (std::size_t level = 0; level < ex.sizes.size(); ++level) {
    const std::uint64_t level_seed = derived_seed(ex.plan.seed, level);
    std::vector<double> sq_phi(points, 0.0), sq_grad(points, 0.0), var_sum(points, 0.0);
    std::vector<std::size_t> covered(points, 0);
    for (std::size_t rep = 0; rep < ex.replications; ++rep) {
      SamplePlan plan = ex.plan;
      plan.count = ex.sizes[level];
      plan.seed = derived_seed(level_seed, rep);
      const SampleSet set = generate_samples(*ex.model, plan);
      const SphericalEvaluator eval(ex.constraint, *ex.model, set.samples, ex.eval);
      for (std::size_t k = 0; k < points; ++k) {
        const SphericalEstimate est = eval.evaluate(ex.grid[k]);
        const double err = est.probability.value - phi_true[k];
        sq_phi[k] += err * err;
        if (grad_true[k]) {
          for (std::size_t i = 0; i < est.gradient.value.size(); ++i) {
            const double d = est.gradient.value[i] - (*grad_true[k])[i];
            sq_grad[k] += d * d;
          }
        }
        if (est.probability.ci95.lo <= phi_true[k] && phi_true[k] <= est.probability.ci95.hi) ++covered[k];
        var_sum[k] += est.probability.variance;
      }
    }
    const double reps = static_cast<double>(ex.replications);
    for (std::size_t k = 0; k < points; ++k) {
      const double mean_var = var_sum[k] / reps;
      const double naive_var = phi_true[k] * (1.0 - phi_true[k]);
      std::optional<double> ratio;
      if (mean_var > 0.0) ratio = naive_var / mean_var;
      std::optional<double> rmse_grad;
      if (grad_true[k]) rmse_grad = std::sqrt(sq_grad[k] / reps);
      out.table.add_row({std::to_string(ex.sizes[level]), format_x(ex.grid[k]), std::to_string(ex.replications),
                         format_double(std::sqrt(sq_phi[k] / reps)), optional_cell(rmse_grad),
                         format_double(static_cast<double>(covered[k]) / reps), optional_cell(ratio),
                         std::to_string(level_seed)});
    }
  }
  return out;
}

ExperimentOutput run_replicate_figure(const Experiment& ex) {
  ExperimentOutput out{CsvTable({"x", "phi_hat", "grad_hat", "naive_hat", "phi_true", "grad_true"}), {}, {}};
  const std::vector<SweepRow> sw = sweep(ex.constraint, *ex.model, ex.grid, ex.plan, true, ex.eval);
  const NaiveEvaluator naive(ex.constraint, *ex.model, ex.plan.count, ex.plan.seed, ex.eval.workers);

  PlotSeries phi_truth{"true", "#000000", {}, {}, false, false};
  PlotSeries phi_sph{"spherical (N=" + std::to_string(ex.plan.count) + ")", "#d62728", {}, {}, false, false};
  PlotSeries phi_naive{"sample average", "#1f77b4", {}, {}, true, true};
  PlotSeries grad_truth{"true", "#000000", {}, {}, false, false};
  PlotSeries grad_sph{"spherical (N=" + std::to_string(ex.plan.count) + ")", "#d62728", {}, {}, false, false};

  double sup_error = 0.0;
  for (const auto& s : sw) {
    const double x = s.x[0];
    const double truth = true_probability_example(s.x, ex.delta, ex.quadrature).value;
    const double gtruth = true_gradient_example(s.x, ex.delta, ex.quadrature).value[0];
    const double nh = naive.probability(s.x).value;
    out.table.add_row({format_double(x), format_double(s.probability.value), format_double(s.gradient.value[0]),
                       format_double(nh), format_double(truth), format_double(gtruth)});
    sup_error = std::max(sup_error, std::fabs(s.gradient.value[0] - gtruth));
    phi_truth.x.push_back(x);
    phi_truth.y.push_back(truth);
    phi_sph.x.push_back(x);
    phi_sph.y.push_back(s.probability.value);
    phi_naive.x.push_back(x);
    phi_naive.y.push_back(nh);
    grad_truth.x.push_back(x);
    grad_truth.y.push_back(gtruth);
    grad_sph.x.push_back(x);
    grad_sph.y.push_back(s.gradient.value[0]);
  }
  std::ostringstream title;
  title << "derivative (sup error " << sup_error << ")";
  out.svg = render_svg({PlotPanel{"probability function", "x", "Phi(x)", {phi_truth, phi_sph, phi_naive}},
                        PlotPanel{title.str(), "x", "Phi'(x)", {grad_truth, grad_sph}}});
  out.diagnostics.push_back("info: sup |grad error| on grid = " + format_double(sup_error));
  return out;
}

ExperimentOutput run_experiment(const Experiment& ex) {
  switch (ex.command) {
    case Command::Estimate: return run_estimate(ex);
    case Command::Gradient: return run_gradient(ex);
    case Command::Compare: return run_compare(ex);
    case Command::Convergence: return run_convergence(ex);
    case Command::ReplicateFigure: return run_replicate_figure(ex);
  }
  throw std::logic_error("run_experiment: bad command");
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two or more points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("loglog_slope: values must be positive");
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace srd
