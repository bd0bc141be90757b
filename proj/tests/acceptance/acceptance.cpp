// Acceptance suite: one PASS/FAIL line per criterion. With no arguments
// every criterion runs; otherwise only the listed numbers. Exit status is
// nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "srd/cli.hpp"
#include "srd/config.hpp"
#include "srd/csv.hpp"
#include "srd/distributions.hpp"
#include "srd/estimators.hpp"
#include "srd/experiments.hpp"
#include "srd/oracle.hpp"
#include "srd/quadrature.hpp"
#include "srd/radial.hpp"

using namespace srd;
namespace fs = std::filesystem;

namespace {

constexpr double kDelta = 2.5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

std::vector<double> example_grid(double step) {
  std::vector<double> xs;
  const int count = static_cast<int>(std::lround(4.0 / step));
  for (int k = 0; k <= count; ++k) xs.push_back(k * step);
  return xs;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Anderson-Darling statistic against the fully specified N(0, 1).
double anderson_darling(std::vector<double> z) {
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double lo = std::clamp(normal_cdf(z[i]), 1e-300, 1.0);
    const double hi = std::clamp(1.0 - normal_cdf(z[z.size() - 1 - i]), 1e-300, 1.0);
    s += (2.0 * static_cast<double>(i) + 1.0) * (std::log(lo) + std::log(hi));
  }
  return -n - s / n;
}

// 1. Radius against the closed form on random (x, c, v).
Outcome radius_correctness() {
  const Stopwatch clock;
  const ParameterModel model = beta_example_model(kDelta);
  const Constraint cons = ball_constraint(2, 2, 2.0);
  const RadialKernel kernel(cons);
  RngStream rng(1001, 0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double c = model.sample_parameter(rng)[0];
    const auto v = sample_sphere(2, rng);
    const auto u = sample_sphere(2, rng);
    const double norm = 4.0 * rng.uniform();
    const std::vector<double> x = {norm * u[0], norm * u[1]};
    const double closed = -c * v[1] + std::sqrt(norm * norm + 2.0 - c * c * v[0] * v[0]);
    const RadiusResult r = kernel.radius(model.gaussian_params(std::vector<double>{c}), x, v);
    worst = std::max(worst, r.kind == RayKind::Finite ? std::fabs(r.rho - closed) : INFINITY);
  }
  const double t = clock.seconds();
  return {worst <= 1e-9 && t < 1.0,
          fmt("max |radius - closed form| = %.3g (tol 1e-9), %.3f s (limit 1 s)", worst, t)};
}

// 2. Kernel gradient against central differences.
Outcome kernel_gradient() {
  const Stopwatch clock;
  const ParameterModel beta = beta_example_model(kDelta);
  const Constraint ball = ball_constraint(1, 2, 2.0);
  const HalfspaceExample hs = mixture_halfspace_example();
  const ParameterModel mixture = mixture_as_parameter_model(hs.mixture);
  const Constraint half = halfspace_constraint(hs.a, hs.b, hs.beta);
  RngStream rng(1002, 0);
  int done[2] = {0, 0};
  double worst = 0.0;
  while (done[0] + done[1] < 200) {
    const int which = done[0] <= done[1] ? 0 : 1;
    const ParameterModel& model = which == 0 ? beta : mixture;
    const Constraint& cons = which == 0 ? ball : half;
    const RadialSample s{sample_sphere(2, rng), model.sample_parameter(rng)};
    std::vector<double> x;
    if (which == 0) {
      x = {4.0 * rng.uniform()};
    } else {
      x = {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
    }
    if (radius(cons, model.gaussian_params(s.parameter), x, s.direction).kind != RayKind::Finite) continue;
    const auto g = radial_gradient(cons, model, s, x);
    const auto fd = finite_difference_gradient(
        [&](std::span<const double> p) { return radial_probability(cons, model, s, p); }, x, 1e-6);
    double diff = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      diff += (g[j] - fd[j]) * (g[j] - fd[j]);
      norm += g[j] * g[j];
    }
    worst = std::max(worst, std::sqrt(diff) / (1.0 + std::sqrt(norm)));
    ++done[which];
  }
  const double t = clock.seconds();
  return {worst <= 1e-5 && t < 5.0,
          fmt("max ||grad - fd|| / (1 + ||grad||) = %.3g over %d+%d instances (tol 1e-5), %.2f s (limit 5 s)", worst,
              done[0], done[1], t)};
}

struct OracleRun {
  double worst_value_ratio = 0.0;
  double worst_grad_ratio = 0.0;
  double seconds = 0.0;
};

// 3 and 4 share one CRN evaluation of the x-grid.
const OracleRun& oracle_run() {
  static const OracleRun run = [] {
    const Stopwatch clock;
    OracleRun out;
    const ParameterModel model = beta_example_model(kDelta);
    const Constraint cons = ball_constraint(1, 2, 2.0);
    const auto samples = draw_samples(model, SamplePlan{1000000, 1003, std::nullopt});
    const SphericalEvaluator eval(cons, model, samples);
    for (double t : example_grid(0.5)) {
      const std::vector<double> x = {t};
      const SphericalEstimate est = eval.evaluate(x);
      const double phi = true_probability_example(x, kDelta).value;
      const double grad = true_gradient_example(x, kDelta).value[0];
      const double tol_v = std::max(3.0 * est.probability.std_error, 2e-3);
      const double tol_g = std::max(3.0 * est.gradient.std_error[0], 2e-3);
      out.worst_value_ratio = std::max(out.worst_value_ratio, std::fabs(est.probability.value - phi) / tol_v);
      out.worst_grad_ratio = std::max(out.worst_grad_ratio, std::fabs(est.gradient.value[0] - grad) / tol_g);
    }
    out.seconds = clock.seconds();
    return out;
  }();
  return run;
}

Outcome oracle_values() {
  const OracleRun& r = oracle_run();
  return {r.worst_value_ratio <= 1.0 && r.seconds < 60.0,
          fmt("max |Phi_N - Phi| / max(3 se, 2e-3) = %.3f (<= 1), N=1e6, %.2f s (limit 60 s)", r.worst_value_ratio,
              r.seconds)};
}

Outcome oracle_gradients() {
  const OracleRun& r = oracle_run();
  return {r.worst_grad_ratio <= 1.0,
          fmt("max |grad Phi_N - grad Phi| / max(3 se, 2e-3) = %.3f (<= 1), N=1e6", r.worst_grad_ratio)};
}

// 5. Sup gradient error over 100 seeds with N = 100.
Outcome figure_reproduction() {
  const Stopwatch clock;
  const ParameterModel model = beta_example_model(kDelta);
  const Constraint cons = ball_constraint(1, 2, 2.0);
  const auto xs = example_grid(0.05);
  std::vector<double> truth;
  for (double t : xs) truth.push_back(true_gradient_example(std::vector<double>{t}, kDelta).value[0]);
  std::vector<double> sup;
  for (std::size_t s = 0; s < 100; ++s) {
    const auto samples = draw_samples(model, SamplePlan{100, derived_seed(1005, s), std::nullopt});
    const SphericalEvaluator eval(cons, model, samples);
    double worst = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double g = eval.evaluate(std::vector<double>{xs[k]}).gradient.value[0];
      worst = std::max(worst, std::fabs(g - truth[k]));
    }
    sup.push_back(worst);
  }
  std::sort(sup.begin(), sup.end());
  const double median = 0.5 * (sup[49] + sup[50]);
  const auto good = std::count_if(sup.begin(), sup.end(), [](double e) { return e <= 7e-4; });
  const double t = clock.seconds();
  return {median <= 1.5e-3 && good >= 10 && t < 60.0,
          fmt("median sup|grad err| = %.3g (<= 1.5e-3), seeds with <= 7e-4: %ld/100 (>= 10), min %.3g, %.2f s",
              median, static_cast<long>(good), sup.front(), t)};
}

// 6. Variance dominance and the exact bound via quadrature of e^2.
Outcome efficiency_dominance() {
  const ParameterModel model = beta_example_model(kDelta);
  const Constraint cons = ball_constraint(1, 2, 2.0);
  bool plug_in = true, exact = true;
  double worst_ratio = 0.0, worst_gap = -INFINITY, worst_quad = 0.0;
  std::size_t k = 0;
  for (double t : example_grid(0.5)) {
    const std::vector<double> x = {t};
    const VarianceComparison vc = variance_comparison(cons, model, x, 100000, derived_seed(1006, k++));
    plug_in = plug_in && vc.sigma2_spherical <= vc.sigma2_naive;
    worst_ratio = std::max(worst_ratio, vc.sigma2_spherical / vc.sigma2_naive);
    const ReferenceMoments ref = reference_probability_2d(cons, model, x);
    const double phi = true_probability_example(x, kDelta).value;
    const double sigma2 = ref.second_moment - ref.phi * ref.phi;
    worst_gap = std::max(worst_gap, sigma2 - (phi - phi * phi));
    worst_quad = std::max(worst_quad, std::fabs(ref.phi - phi));
    exact = exact && sigma2 <= phi - phi * phi + 1e-8 && std::fabs(ref.phi - phi) <= 1e-8;
  }
  return {plug_in && exact,
          fmt("max plug-in ratio sph/naive = %.3f (<= 1); max sigma2 - (Phi - Phi^2) = %.3g (<= 1e-8); "
              "quadrature |Phi_ref - Phi| <= %.2g (<= 1e-8)",
              worst_ratio, worst_gap, worst_quad)};
}

// 7. CI coverage and normality of the standardized errors.
Outcome clt() {
  const Stopwatch clock;
  const ParameterModel model = beta_example_model(kDelta);
  const Constraint cons = ball_constraint(1, 2, 2.0);
  const std::vector<double> x = {2.0};
  const double phi = true_probability_example(x, kDelta).value;
  std::vector<double> z;
  int covered = 0;
  for (std::size_t r = 0; r < 500; ++r) {
    const auto samples = draw_samples(model, SamplePlan{1000, derived_seed(1007, r), std::nullopt});
    const ProbabilityEstimate p = estimate_probability(cons, model, x, samples);
    if (p.ci95.lo <= phi && phi <= p.ci95.hi) ++covered;
    z.push_back((p.value - phi) / p.std_error);
  }
  const double coverage = covered / 500.0;
  const double a2 = anderson_darling(z);
  const double t = clock.seconds();
  return {coverage >= 0.93 && coverage <= 0.97 && a2 < 3.857 && t < 120.0,
          fmt("coverage = %.3f (in [0.93, 0.97]), Anderson-Darling A2 = %.3f (< 3.857 at 1%%), %.2f s (limit 120 s)",
              coverage, a2, t)};
}

// 8. RMSE slope over the sample-size ladder.
Outcome convergence_rate() {
  const Config cfg = Config::parse(
      "model = beta-example\nmodel.delta = 2.5\nconstraint = ball\nconstraint.offset = 2\n"
      "grid.points = 2\nconvergence.sizes = 100, 1000, 10000, 100000\nconvergence.replications = 50\n"
      "seed = 1008\n",
      "<convergence>");
  const Experiment ex = build_experiment(Command::Convergence, cfg);
  const ExperimentOutput out = run_convergence(ex);
  std::vector<double> ns, rmse;
  for (const auto& row : out.table.rows()) {
    ns.push_back(*parse_cell_double(row[out.table.column("n")]));
    rmse.push_back(*parse_cell_double(row[out.table.column("rmse_phi")]));
  }
  const double slope = loglog_slope(ns, rmse);
  return {slope >= -0.6 && slope <= -0.4,
          fmt("log-log RMSE slope = %.4f (in [-0.6, -0.4]); RMSE %.3g, %.3g, %.3g, %.3g at x=2", slope, rmse[0],
              rmse[1], rmse[2], rmse[3])};
}

// 9. Chi and noncentral chi-square primitives.
Outcome distribution_primitives() {
  const ChiLaw chi2(2);
  double closed = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double r = 0.01 * i;
    closed = std::max(closed, std::fabs(chi2.cdf(r) - (1.0 - std::exp(-0.5 * r * r))));
  }
  const QuadratureRule gl = gauss_legendre(64);
  double quad = 0.0;
  for (int m : {1, 2, 3, 5, 10}) {
    const ChiLaw chi(m);
    for (double r : {0.5, 1.0, 2.0, 4.0, 6.0}) {
      double integral = 0.0;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double s = 0.5 * r * (gl.nodes[i] + 1.0);
        integral += 0.5 * r * gl.weights[i] * chi.pdf(s);
      }
      quad = std::max(quad, std::fabs(integral - chi.cdf(r)));
    }
  }
  RngStream rng(1009, 0);
  const long draws = 10000000;
  long inside = 0;
  for (long i = 0; i < draws; ++i) {
    const double a = rng.normal() + 1.0;
    const double b = rng.normal();
    if (a * a + b * b <= 2.0) ++inside;
  }
  const double mc = static_cast<double>(inside) / static_cast<double>(draws);
  const double ncx = NoncentralChiSquareLaw(2, 1.0).cdf(2.0);
  const double mc_err = std::fabs(ncx - mc);
  return {closed <= 1e-12 && quad <= 1e-10 && mc_err <= 3e-4,
          fmt("chi m=2 closed-form err %.2g (<= 1e-12), pdf quadrature err %.2g (<= 1e-10), "
              "ncx2 cdf(2,1,2) = %.6f vs MC %.6f, err %.2g (<= 3e-4)",
              closed, quad, ncx, mc, mc_err)};
}

// 10. Byte-identical CSV across reruns and worker counts.
Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "srd_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cfg = (dir / "ex.cfg").string();
  std::ofstream(cfg) << "model = beta-example\nmodel.delta = 2.5\nconstraint = ball\nconstraint.offset = 2\n"
                        "grid.start = 0\ngrid.stop = 4\ngrid.step = 0.5\nsamples = 100000\nseed = 1010\nnaive = true\n";
  std::ostringstream diag;
  const auto run = [&](const std::string& name, const std::string& workers) {
    const std::string out = (dir / name).string();
    const int code = run_cli({"srd", "estimate", "--config", cfg, "--out", out, "--workers", workers}, diag);
    std::ifstream in(out, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return std::make_pair(code, text.str());
  };
  const auto a = run("a.csv", "1");
  const auto b = run("b.csv", "1");
  const auto c = run("c.csv", "8");
  fs::remove_all(dir);
  const bool ok = a.first == 0 && b.first == 0 && c.first == 0 && !a.second.empty() && a.second == b.second &&
                  a.second == c.second;
  return {ok, fmt("exit codes %d/%d/%d, %zu-byte CSV, rerun identical: %s, workers 1 vs 8 identical: %s", a.first,
                  b.first, c.first, a.second.size(), a.second == b.second ? "yes" : "no",
                  a.second == c.second ? "yes" : "no")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "radius correctness", radius_correctness},
      {2, "kernel gradient", kernel_gradient},
      {3, "oracle agreement (values)", oracle_values},
      {4, "oracle agreement (gradients)", oracle_gradients},
      {5, "figure reproduction", figure_reproduction},
      {6, "efficiency dominance", efficiency_dominance},
      {7, "CLT", clt},
      {8, "convergence rate", convergence_rate},
      {9, "distribution primitives", distribution_primitives},
      {10, "determinism", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %2d  %-30s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
