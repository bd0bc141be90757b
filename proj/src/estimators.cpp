#include "srd/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "parallel.hpp"
#include "srd/distributions.hpp"
#include "srd/errors.hpp"
#include "srd/kernels.hpp"

namespace srd {
namespace {

constexpr double kZ95 = 1.959963984540054;

// Rethrows the in-flight exception with the failing sample index prepended.
[[noreturn]] void rethrow_for_sample(std::size_t index) {
  const std::string prefix = "sample " + std::to_string(index) + ": ";
  try {
    throw;
  } catch (const SlaterViolation& e) {
    throw SlaterViolation(prefix + e.what());
  } catch (const ConvexityViolation& e) {
    throw ConvexityViolation(prefix + e.what());
  } catch (const DegenerateBoundary& e) {
    throw DegenerateBoundary(prefix + e.what());
  } catch (const ModelMisspecification& e) {
    throw ModelMisspecification(prefix + e.what());
  }
}

ProbabilityEstimate summarize(std::span<const double> terms) {
  ProbabilityEstimate est;
  est.n = terms.size();
  if (terms.empty()) throw std::invalid_argument("estimate: empty sample");
  const double n = static_cast<double>(terms.size());
  const double mean = kernels::compensated_sum(terms) / n;
  est.value = std::clamp(mean, 0.0, 1.0);
  if (terms.size() == 1) {
    est.degenerate_n = true;
    est.variance = 0.0;
  } else {
    est.variance = std::max(0.0, kernels::sum_squared_deviation(terms, mean) / (n - 1.0));
  }
  est.std_error = std::sqrt(est.variance / n);
  est.ci95 = {std::max(0.0, est.value - kZ95 * est.std_error), std::min(1.0, est.value + kZ95 * est.std_error)};
  return est;
}

GradientEstimate summarize_gradient(const std::vector<std::vector<double>>& coords, std::size_t count) {
  GradientEstimate est;
  est.n = count;
  const std::size_t dim = coords.size();
  const double n = static_cast<double>(count);
  est.value.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) est.value[j] = kernels::compensated_sum(coords[j]) / n;
  est.covariance.assign(dim * dim, 0.0);
  if (count > 1) {
    for (std::size_t j = 0; j < dim; ++j) {
      for (std::size_t k = j; k < dim; ++k) {
        const double c =
            kernels::sum_cross_deviation(coords[j], est.value[j], coords[k], est.value[k]) / (n - 1.0);
        est.covariance[j * dim + k] = c;
        est.covariance[k * dim + j] = c;
      }
    }
  }
  est.std_error.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) est.std_error[j] = std::sqrt(std::max(0.0, est.cov(j, j)) / n);
  return est;
}

double sample_fourth_moment(std::span<const double> terms, double mean) {
  double acc = 0.0;
  for (double t : terms) {
    const double d = (t - mean) * (t - mean);
    acc += d * d;
  }
  return acc / static_cast<double>(terms.size());
}

// Approximate standard error of an unbiased sample variance.
double variance_stderr(double variance, double fourth_moment, std::size_t n) {
  if (n < 2) return 0.0;
  return std::sqrt(std::max(0.0, fourth_moment - variance * variance) / static_cast<double>(n));
}

double default_proposal_scale(const ParameterModel& model, std::uint64_t seed) {
  if (model.support()) return 0.5 * (model.support()->second - model.support()->first);
  RngStream rng(seed, streams::kDiagnostics);
  const int p = model.parameter_dimension();
  std::vector<double> lo(static_cast<std::size_t>(p), std::numeric_limits<double>::infinity());
  std::vector<double> hi(static_cast<std::size_t>(p), -std::numeric_limits<double>::infinity());
  for (int i = 0; i < 256; ++i) {
    const Parameter c = model.sample_parameter(rng);
    for (std::size_t j = 0; j < c.size(); ++j) {
      lo[j] = std::min(lo[j], c[j]);
      hi[j] = std::max(hi[j], c[j]);
    }
  }
  double diam2 = 0.0;
  for (std::size_t j = 0; j < lo.size(); ++j) diam2 += (hi[j] - lo[j]) * (hi[j] - lo[j]);
  const double scale = 0.5 * std::sqrt(diam2);
  return scale > 0.0 ? scale : 1.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Sampling

void SamplePlan::validate() const {
  if (count < 1) throw ConfigError("sample plan: count must be >= 1");
  if (mcmc) {
    if (mcmc->proposal_scale < 0.0 || !std::isfinite(mcmc->proposal_scale)) {
      throw ConfigError("sample plan: MCMC proposal scale must be > 0");
    }
    if (mcmc->thinning < 1) throw ConfigError("sample plan: MCMC thinning must be >= 1");
  }
}

std::vector<RadialSample> draw_samples(const ParameterModel& model, const SamplePlan& plan) {
  plan.validate();
  if (plan.mcmc) throw ConfigError("draw_samples: plan requests MCMC sampling");
  std::vector<RadialSample> out(plan.count);
  const int m = model.dimension();
  for (std::size_t i = 0; i < plan.count; ++i) {
    RngStream rng(plan.seed, streams::kSpherical + i);
    out[i].direction = sample_sphere(m, rng);
    out[i].parameter = model.sample_parameter(rng);
  }
  return out;
}

SampleSet mcmc_samples(const ParameterModel& model, const SamplePlan& plan) {
  plan.validate();
  if (!plan.mcmc) throw ConfigError("mcmc_samples: plan has no MCMC options");
  if (!model.has_density()) {
    throw ConfigError("MCMC sampling needs a prior density; model '" + model.name() + "' has none");
  }
  const McmcOptions& opt = *plan.mcmc;
  const double scale = opt.proposal_scale > 0.0 ? opt.proposal_scale : default_proposal_scale(model, plan.seed);

  RngStream chain(plan.seed, streams::kChain);
  Parameter state = model.sample_parameter(chain);
  double density = model.density(state);
  if (!(density > 0.0)) throw NumericalError("MCMC: prior density vanishes at the initial state");

  SampleSet set;
  set.from_chain = true;
  set.proposal_scale = scale;
  set.samples.resize(plan.count);
  const std::size_t total = opt.burn_in + plan.count * opt.thinning;
  std::size_t accepted = 0;
  std::size_t kept = 0;
  Parameter proposal(state.size());
  for (std::size_t step = 0; step < total; ++step) {
    for (std::size_t j = 0; j < state.size(); ++j) proposal[j] = state[j] + scale * chain.normal();
    const double proposed = model.density(proposal);
    if (proposed > 0.0 && chain.uniform() * density < proposed) {
      state = proposal;
      density = proposed;
      ++accepted;
    }
    if (step >= opt.burn_in && (step - opt.burn_in) % opt.thinning == opt.thinning - 1) {
      RngStream rng(plan.seed, streams::kSpherical + kept);
      set.samples[kept].direction = sample_sphere(model.dimension(), rng);
      set.samples[kept].parameter = state;
      ++kept;
    }
  }
  set.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(total);
  return set;
}

SampleSet generate_samples(const ParameterModel& model, const SamplePlan& plan) {
  if (plan.mcmc) return mcmc_samples(model, plan);
  SampleSet set;
  set.samples = draw_samples(model, plan);
  return set;
}

// ---------------------------------------------------------------------------
// Spherical estimator

SphericalEvaluator::SphericalEvaluator(const Constraint& cons, const ParameterModel& model,
                                       std::span<const RadialSample> samples, EvalOptions opts)
    : cons_(&cons), opts_(opts), kernel_(cons, opts.radius), samples_(samples.begin(), samples.end()) {
  if (samples_.empty()) throw std::invalid_argument("spherical estimator: empty sample");
  if (model.dimension() != cons.random_dimension) {
    throw ConfigError("model dimension " + std::to_string(model.dimension()) + " does not match constraint dimension " +
                      std::to_string(cons.random_dimension));
  }
  params_.reserve(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (static_cast<int>(samples_[i].direction.size()) != cons.random_dimension) {
      throw ConfigError("sample " + std::to_string(i) + " has the wrong direction dimension");
    }
    try {
      params_.push_back(model.gaussian_params(samples_[i].parameter));
    } catch (const NumericalError&) {
      rethrow_for_sample(i);
    }
  }

  closed_form_ = opts.path == EvalPath::Auto && cons.ball.has_value() &&
                 std::all_of(params_.begin(), params_.end(),
                             [](const GaussianParams& p) { return p.chol.isotropic_scale().has_value(); });
  if (closed_form_) {
    const std::size_t n = samples_.size();
    along_.resize(n);
    mean_sq_.resize(n);
    inv_scale_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& mu = params_[i].mean;
      const auto& v = samples_[i].direction;
      double a = 0.0;
      double b = 0.0;
      for (std::size_t j = 0; j < mu.size(); ++j) {
        a += mu[j] * v[j];
        b += mu[j] * mu[j];
      }
      along_[i] = a;
      mean_sq_[i] = b;
      inv_scale_[i] = 1.0 / *params_[i].chol.isotropic_scale();
    }
  }
}

void SphericalEvaluator::check_x(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != cons_->decision_dimension) {
    throw ConfigError("decision vector has dimension " + std::to_string(x.size()) + ", constraint expects " +
                      std::to_string(cons_->decision_dimension));
  }
}

std::optional<bool> SphericalEvaluator::slater_flag(std::span<const double> x) const {
  if (!opts_.slater_gamma0) return std::nullopt;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : params_) worst = std::max(worst, (*cons_)(x, p.mean));
  return worst < -*opts_.slater_gamma0;
}

void SphericalEvaluator::evaluate_terms(std::span<const double> x, std::span<double> e,
                                        std::vector<std::vector<double>>* coords) const {
  const std::size_t count = samples_.size();
  const std::size_t dim = x.size();
  if (coords) coords->assign(dim, std::vector<double>(count));

  if (closed_form_) {
    double s = cons_->ball->offset;
    for (double xi : x) s += xi * xi;
    std::vector<double> coef(coords ? count : 0);
    std::vector<std::size_t> first_bad((count + detail::kBlockSize - 1) / detail::kBlockSize, kernels::npos);
    detail::parallel_blocks(count, opts_.workers, [&](std::size_t begin, std::size_t end) {
      const std::size_t len = end - begin;
      const kernels::BallBatch batch{std::span<const double>(along_).subspan(begin, len),
                                     std::span<const double>(mean_sq_).subspan(begin, len),
                                     std::span<const double>(inv_scale_).subspan(begin, len)};
      const std::size_t bad = kernels::ball_kernel(cons_->random_dimension, s, batch, e.subspan(begin, len),
                                                   coords ? std::span<double>(coef).subspan(begin, len)
                                                          : std::span<double>{});
      if (bad != kernels::npos) first_bad[begin / detail::kBlockSize] = begin + bad;
    });
    for (std::size_t bad : first_bad) {
      if (bad != kernels::npos) {
        throw SlaterViolation("sample " + std::to_string(bad) + ": ray origin infeasible: g(x, mean) >= 0");
      }
    }
    if (coords) {
      for (std::size_t j = 0; j < dim; ++j) {
        auto& col = (*coords)[j];
        for (std::size_t i = 0; i < count; ++i) col[i] = coef[i] * x[j];
      }
    }
    return;
  }

  detail::parallel_blocks(count, opts_.workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> grad(coords ? dim : 0);
    for (std::size_t i = begin; i < end; ++i) {
      try {
        e[i] = kernel_.evaluate(params_[i], x, samples_[i].direction, grad);
      } catch (const NumericalError&) {
        rethrow_for_sample(i);
      }
      if (coords) {
        for (std::size_t j = 0; j < dim; ++j) (*coords)[j][i] = grad[j];
      }
    }
  });
}

void SphericalEvaluator::kernel_values(std::span<const double> x, std::span<double> e,
                                       std::vector<double>* gradients) const {
  check_x(x);
  if (e.size() != samples_.size()) throw std::invalid_argument("kernel_values: output size mismatch");
  if (!gradients) {
    evaluate_terms(x, e, nullptr);
    return;
  }
  std::vector<std::vector<double>> coords;
  evaluate_terms(x, e, &coords);
  const std::size_t dim = x.size();
  gradients->assign(samples_.size() * dim, 0.0);
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) (*gradients)[i * dim + j] = coords[j][i];
  }
}

ProbabilityEstimate SphericalEvaluator::probability(std::span<const double> x) const {
  check_x(x);
  std::vector<double> e(samples_.size());
  evaluate_terms(x, e, nullptr);
  ProbabilityEstimate est = summarize(e);
  est.verified_slater = slater_flag(x);
  return est;
}

SphericalEstimate SphericalEvaluator::evaluate(std::span<const double> x) const {
  check_x(x);
  std::vector<double> e(samples_.size());
  std::vector<std::vector<double>> coords;
  evaluate_terms(x, e, &coords);
  SphericalEstimate out;
  out.probability = summarize(e);
  out.probability.verified_slater = slater_flag(x);
  out.gradient = summarize_gradient(coords, samples_.size());
  return out;
}

ProbabilityEstimate estimate_probability(const Constraint& cons, const ParameterModel& model,
                                         std::span<const double> x, std::span<const RadialSample> samples,
                                         const EvalOptions& opts) {
  return SphericalEvaluator(cons, model, samples, opts).probability(x);
}

GradientEstimate estimate_gradient(const Constraint& cons, const ParameterModel& model, std::span<const double> x,
                                   std::span<const RadialSample> samples, const EvalOptions& opts) {
  return SphericalEvaluator(cons, model, samples, opts).evaluate(x).gradient;
}

// ---------------------------------------------------------------------------
// Naive estimator

NaiveEvaluator::NaiveEvaluator(const Constraint& cons, const ParameterModel& model, std::size_t count,
                               std::uint64_t seed, unsigned workers)
    : cons_(&cons), count_(count), m_(model.dimension()), workers_(workers) {
  if (count < 1) throw ConfigError("naive estimator: count must be >= 1");
  if (model.dimension() != cons.random_dimension) throw ConfigError("naive estimator: dimension mismatch");
  const auto m = static_cast<std::size_t>(m_);
  draws_.resize(count * m);
  detail::parallel_blocks(count, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> z(m);
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng(seed, streams::kNaive + i);
      const Parameter c = model.sample_parameter(rng);
      GaussianParams p;
      try {
        p = model.gaussian_params(c);
      } catch (const NumericalError&) {
        rethrow_for_sample(i);
      }
      for (double& zi : z) zi = rng.normal();
      std::span<double> xi(draws_.data() + i * m, m);
      p.chol.apply(z, xi);
      for (std::size_t j = 0; j < m; ++j) xi[j] += p.mean[j];
    }
  });
}

ProbabilityEstimate NaiveEvaluator::probability(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != cons_->decision_dimension) {
    throw ConfigError("naive estimator: decision vector dimension mismatch");
  }
  const auto m = static_cast<std::size_t>(m_);
  std::vector<std::size_t> hits((count_ + detail::kBlockSize - 1) / detail::kBlockSize, 0);
  detail::parallel_blocks(count_, workers_, [&](std::size_t begin, std::size_t end) {
    std::size_t h = 0;
    for (std::size_t i = begin; i < end; ++i) {
      if ((*cons_)(x, std::span<const double>(draws_.data() + i * m, m)) <= 0.0) ++h;
    }
    hits[begin / detail::kBlockSize] = h;
  });
  std::size_t total = 0;
  for (std::size_t h : hits) total += h;

  ProbabilityEstimate est;
  est.n = count_;
  const double n = static_cast<double>(count_);
  const double p = static_cast<double>(total) / n;
  est.value = p;
  if (count_ == 1) {
    est.degenerate_n = true;
  } else {
    // Sample variance of the indicators: N/(N-1) * p(1-p).
    est.variance = p * (1.0 - p) * n / (n - 1.0);
  }
  est.std_error = std::sqrt(est.variance / n);
  est.ci95 = {std::max(0.0, p - kZ95 * est.std_error), std::min(1.0, p + kZ95 * est.std_error)};
  return est;
}

ProbabilityEstimate naive_estimate(const Constraint& cons, const ParameterModel& model, std::span<const double> x,
                                   std::size_t count, std::uint64_t seed, unsigned workers) {
  return NaiveEvaluator(cons, model, count, seed, workers).probability(x);
}

// ---------------------------------------------------------------------------
// Comparison and sweeps

VarianceComparison variance_comparison(const Constraint& cons, const ParameterModel& model,
                                       std::span<const double> x, std::size_t count, std::uint64_t seed,
                                       const EvalOptions& opts) {
  if (count < 2) throw ConfigError("variance comparison: count must be >= 2");
  VarianceComparison out;

  const std::vector<RadialSample> samples = draw_samples(model, SamplePlan{count, seed, std::nullopt});
  const SphericalEvaluator spherical(cons, model, samples, opts);
  std::vector<double> e(count);
  spherical.kernel_values(x, e, nullptr);
  out.spherical = summarize(e);
  out.spherical.verified_slater = std::nullopt;
  out.sigma2_spherical = out.spherical.variance;

  out.naive = naive_estimate(cons, model, x, count, seed, opts.workers);
  out.sigma2_naive = out.naive.variance;

  const double p = out.naive.value;
  const double naive_mu4 = p * (1.0 - p) * (1.0 - 3.0 * p + 3.0 * p * p);
  const double se_sph = variance_stderr(out.sigma2_spherical, sample_fourth_moment(e, out.spherical.value), count);
  const double se_naive = variance_stderr(out.sigma2_naive, naive_mu4, count);
  out.combined_stderr = std::sqrt(se_sph * se_sph + se_naive * se_naive);
  out.dominance = out.sigma2_spherical <= out.sigma2_naive + 3.0 * out.combined_stderr;
  return out;
}

std::uint64_t derived_seed(std::uint64_t seed, std::size_t k) {
  return RngStream(seed, streams::kDiagnostics + 1 + k)();
}

std::vector<SweepRow> sweep(const Constraint& cons, const ParameterModel& model,
                            const std::vector<std::vector<double>>& grid, const SamplePlan& plan, bool crn,
                            const EvalOptions& opts) {
  if (grid.empty()) throw ConfigError("sweep: empty grid");
  plan.validate();
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());

  if (crn) {
    const SampleSet set = generate_samples(model, plan);
    const SphericalEvaluator eval(cons, model, set.samples, opts);
    for (const auto& x : grid) {
      SphericalEstimate est = eval.evaluate(x);
      rows.push_back({x, plan.seed, std::move(est.probability), std::move(est.gradient)});
    }
    return rows;
  }

  for (std::size_t k = 0; k < grid.size(); ++k) {
    SamplePlan local = plan;
    local.seed = derived_seed(plan.seed, k);
    const SampleSet set = generate_samples(model, local);
    SphericalEstimate est = SphericalEvaluator(cons, model, set.samples, opts).evaluate(grid[k]);
    rows.push_back({grid[k], local.seed, std::move(est.probability), std::move(est.gradient)});
  }
  return rows;
}

}  // namespace srd
