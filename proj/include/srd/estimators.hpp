#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "srd/model.hpp"
#include "srd/radial.hpp"

namespace srd {

struct McmcOptions {
  // Gaussian random-walk step; 0 selects half the estimated diameter of
  // the parameter space.
  double proposal_scale = 0.0;
  std::size_t burn_in = 1000;
  std::size_t thinning = 1;
};

struct SamplePlan {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::optional<McmcOptions> mcmc;  // empty: i.i.d. sampling

  void validate() const;
};

struct SampleSet {
  std::vector<RadialSample> samples;
  bool from_chain = false;
  double acceptance_rate = 1.0;
  double proposal_scale = 0.0;
};

// N independent (v_i, c_i); sample i depends only on (seed, i).
std::vector<RadialSample> draw_samples(const ParameterModel& model, const SamplePlan& plan);

// Random-walk Metropolis chain on c targeting the prior density, with a
// fresh uniform direction per kept state. Throws ConfigError when the
// model has no density.
SampleSet mcmc_samples(const ParameterModel& model, const SamplePlan& plan);

// Dispatches on plan.mcmc.
SampleSet generate_samples(const ParameterModel& model, const SamplePlan& plan);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct ProbabilityEstimate {
  double value = 0.0;
  double variance = 0.0;   // unbiased sample variance of the per-sample terms
  double std_error = 0.0;  // sqrt(variance / n)
  Interval ci95;
  std::size_t n = 0;
  bool degenerate_n = false;            // n == 1: variance reported as 0
  std::optional<bool> verified_slater;  // empty when no margin was requested
};

struct GradientEstimate {
  std::vector<double> value;
  std::vector<double> covariance;  // row-major n x n
  std::vector<double> std_error;   // sqrt(diag(covariance) / N)
  std::size_t n = 0;

  double cov(std::size_t i, std::size_t j) const { return covariance[i * value.size() + j]; }
};

enum class EvalPath {
  Auto,     // closed-form batch kernel when the constraint/model allow it
  Generic,  // ray bisection for every sample
};

struct EvalOptions {
  unsigned workers = 1;
  EvalPath path = EvalPath::Auto;
  RadiusOptions radius;
  // When set, estimates record whether max_i g(x, mean(c_i)) < -gamma0.
  std::optional<double> slater_gamma0;
};

struct SphericalEstimate {
  ProbabilityEstimate probability;
  GradientEstimate gradient;
};

// Evaluates the empirical spherical approximation over a fixed sample set.
// Per-sample Gaussian parameters are resolved once, so evaluating many x
// against one evaluator is the common-random-numbers regime.
class SphericalEvaluator {
 public:
  SphericalEvaluator(const Constraint& cons, const ParameterModel& model, std::span<const RadialSample> samples,
                     EvalOptions opts = {});

  bool uses_closed_form() const { return closed_form_; }
  std::size_t size() const { return samples_.size(); }

  ProbabilityEstimate probability(std::span<const double> x) const;
  SphericalEstimate evaluate(std::span<const double> x) const;

  // Per-sample kernel values e_{c_i}(x, v_i), and gradients (row i of a
  // row-major N x n array) when `gradients` is non-null.
  void kernel_values(std::span<const double> x, std::span<double> e, std::vector<double>* gradients) const;

 private:
  void check_x(std::span<const double> x) const;
  std::optional<bool> slater_flag(std::span<const double> x) const;
  // Fills e and, when coords is non-null, the gradient split into n
  // contiguous coordinate arrays.
  void evaluate_terms(std::span<const double> x, std::span<double> e, std::vector<std::vector<double>>* coords) const;

  const Constraint* cons_;
  EvalOptions opts_;
  RadialKernel kernel_;
  std::vector<RadialSample> samples_;
  std::vector<GaussianParams> params_;
  bool closed_form_ = false;
  // Closed-form geometry (see kernels::BallBatch).
  std::vector<double> along_, mean_sq_, inv_scale_;
};

ProbabilityEstimate estimate_probability(const Constraint& cons, const ParameterModel& model,
                                         std::span<const double> x, std::span<const RadialSample> samples,
                                         const EvalOptions& opts = {});

GradientEstimate estimate_gradient(const Constraint& cons, const ParameterModel& model, std::span<const double> x,
                                   std::span<const RadialSample> samples, const EvalOptions& opts = {});

// Indicator-average estimator over raw draws xi_i = mean(c_i) + L(c_i) z_i.
// The draws are fixed at construction so sweeps over x reuse them.
class NaiveEvaluator {
 public:
  NaiveEvaluator(const Constraint& cons, const ParameterModel& model, std::size_t count, std::uint64_t seed,
                 unsigned workers = 1);

  ProbabilityEstimate probability(std::span<const double> x) const;
  std::size_t size() const { return count_; }

 private:
  const Constraint* cons_;
  std::size_t count_;
  int m_;
  unsigned workers_;
  std::vector<double> draws_;  // row-major count x m
};

ProbabilityEstimate naive_estimate(const Constraint& cons, const ParameterModel& model, std::span<const double> x,
                                   std::size_t count, std::uint64_t seed, unsigned workers = 1);

struct VarianceComparison {
  ProbabilityEstimate spherical;
  ProbabilityEstimate naive;
  double sigma2_spherical = 0.0;
  double sigma2_naive = 0.0;
  // Standard error of sigma2_naive - sigma2_spherical.
  double combined_stderr = 0.0;
  bool dominance = false;  // sigma2_spherical <= sigma2_naive + 3 * combined_stderr
};

// Both plug-in variances at x, from independent sample sets of size N.
VarianceComparison variance_comparison(const Constraint& cons, const ParameterModel& model,
                                       std::span<const double> x, std::size_t count, std::uint64_t seed,
                                       const EvalOptions& opts = {});

struct SweepRow {
  std::vector<double> x;
  std::uint64_t seed = 0;  // seed of the sample set used at this point
  ProbabilityEstimate probability;
  GradientEstimate gradient;
};

// Seed of the k-th independent sample set derived from a base seed.
std::uint64_t derived_seed(std::uint64_t seed, std::size_t k);

// With crn set, one sample set is shared by every grid point; otherwise
// grid point k gets its own seed derived from (plan.seed, k).
std::vector<SweepRow> sweep(const Constraint& cons, const ParameterModel& model,
                            const std::vector<std::vector<double>>& grid, const SamplePlan& plan, bool crn,
                            const EvalOptions& opts = {});

}  // namespace srd
