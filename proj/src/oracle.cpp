#include "srd/oracle.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "srd/distributions.hpp"
#include "srd/errors.hpp"
#include "srd/quadrature.hpp"

namespace srd {
namespace {

double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

// Refines `level(n)` by doubling n until successive values agree.
template <class Level>
auto refine(const QuadratureSpec& spec, const char* what, Level&& level) {
  spec.validate();
  int n = spec.nodes;
  auto previous = level(n);
  for (int d = 0; d < spec.max_doublings; ++d) {
    n *= 2;
    auto current = level(n);
    const double change = current.distance(previous);
    if (change <= spec.tolerance) {
      current.error = change;
      current.nodes = n;
      return current;
    }
    previous = std::move(current);
  }
  std::ostringstream os;
  os << what << ": node doubling did not converge within " << spec.max_doublings << " doublings (last nodes=" << n
     << ", tolerance=" << spec.tolerance << ")";
  throw QuadratureFailure(os.str());
}

struct ScalarLevel {
  double value = 0.0;
  double error = 0.0;
  int nodes = 0;
  double distance(const ScalarLevel& o) const { return std::fabs(value - o.value); }
};

struct MomentLevel {
  double phi = 0.0;
  double second = 0.0;
  double error = 0.0;
  int nodes = 0;
  double distance(const MomentLevel& o) const {
    return std::max(std::fabs(phi - o.phi), std::fabs(second - o.second));
  }
};

// Prior-averaged noncentral chi-square quantity at t for the Beta example.
template <class Integrand>
double beta_average(int n, double delta, Integrand&& f) {
  const QuadratureRule rule = gauss_jacobi(n, delta - 1.0, delta - 1.0);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double c = rule.nodes[i];
    num += rule.weights[i] * f(c * c);
    den += rule.weights[i];
  }
  return num / den;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

void QuadratureSpec::validate() const {
  if (nodes < 8) throw ConfigError("quadrature: nodes per axis must be >= 8");
  if (max_doublings < 1) throw ConfigError("quadrature: max_doublings must be >= 1");
  if (!(tolerance > 0.0)) throw ConfigError("quadrature: tolerance must be > 0");
}

QuadratureResult true_probability_example(std::span<const double> x, double delta, const QuadratureSpec& spec) {
  if (!(delta > 0.0)) throw std::invalid_argument("true_probability_example: delta must be > 0");
  const double t = squared_norm(x) + 2.0;
  const ScalarLevel r = refine(spec, "true_probability_example", [&](int n) {
    ScalarLevel level;
    level.value = beta_average(n, delta, [t](double lambda) { return NoncentralChiSquareLaw(2, lambda).cdf(t); });
    return level;
  });
  return {r.value, r.error, r.nodes};
}

GradientQuadratureResult true_gradient_example(std::span<const double> x, double delta,
                                               const QuadratureSpec& spec) {
  if (!(delta > 0.0)) throw std::invalid_argument("true_gradient_example: delta must be > 0");
  const double t = squared_norm(x) + 2.0;
  const ScalarLevel r = refine(spec, "true_gradient_example", [&](int n) {
    ScalarLevel level;
    level.value = beta_average(n, delta, [t](double lambda) { return NoncentralChiSquareLaw(2, lambda).pdf(t); });
    return level;
  });
  GradientQuadratureResult out;
  out.value.resize(x.size());
  double xnorm = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.value[i] = 2.0 * r.value * x[i];
    xnorm = std::max(xnorm, std::fabs(x[i]));
  }
  out.error_estimate = 2.0 * r.error * xnorm;
  out.nodes = r.nodes;
  return out;
}

ReferenceMoments reference_probability_2d(const Constraint& cons, const ParameterModel& model,
                                          std::span<const double> x, const QuadratureSpec& spec,
                                          const RadiusOptions& radius) {
  if (model.dimension() != 2 || cons.random_dimension != 2) {
    throw ConfigError("reference_probability_2d: requires m = 2");
  }
  if (model.parameter_dimension() != 1) throw ConfigError("reference_probability_2d: requires a scalar parameter");
  if (!model.is_discrete() && (!model.support() || !model.has_density())) {
    throw ConfigError("reference_probability_2d: continuous prior needs a support interval and a density");
  }
  const RadialKernel kernel(cons, radius);

  const MomentLevel r = refine(spec, "reference_probability_2d", [&](int n) {
    const QuadratureRule angle = gauss_legendre(n);
    // Parameter nodes and (unnormalized) weights.
    std::vector<double> cs, ws;
    if (model.is_discrete()) {
      for (const auto& atom : model.atoms()) {
        cs.push_back(atom.value[0]);
        ws.push_back(atom.weight);
      }
    } else {
      const auto [lo, hi] = *model.support();
      const QuadratureRule u = gauss_legendre(n);
      for (std::size_t i = 0; i < u.nodes.size(); ++i) {
        const double ui = 0.5 * (u.nodes[i] + 1.0);
        const double c = lo + 0.5 * (hi - lo) * (1.0 - std::cos(std::numbers::pi * ui));
        const double jac = 0.25 * (hi - lo) * std::numbers::pi * std::sin(std::numbers::pi * ui);
        const double c_arr[1] = {c};
        cs.push_back(c);
        ws.push_back(0.5 * u.weights[i] * jac * model.density(c_arr));
      }
    }
    // Numerator and normalizer accumulate identically, so e == 1 gives 1.
    MomentLevel level;
    double num = 0.0, num2 = 0.0, den = 0.0;
    double v[2];
    for (std::size_t ic = 0; ic < cs.size(); ++ic) {
      if (ws[ic] == 0.0) continue;
      const double c_arr[1] = {cs[ic]};
      const GaussianParams params = model.gaussian_params(c_arr);
      double phi = 0.0, second = 0.0, mass = 0.0;
      for (std::size_t it = 0; it < angle.nodes.size(); ++it) {
        const double theta = std::numbers::pi * (angle.nodes[it] + 1.0);
        v[0] = std::cos(theta);
        v[1] = std::sin(theta);
        const double e = kernel.probability(params, x, v);
        phi += angle.weights[it] * e;
        second += angle.weights[it] * e * e;
        mass += angle.weights[it];
      }
      num += ws[ic] * phi;
      num2 += ws[ic] * second;
      den += ws[ic] * mass;
    }
    if (!(den > 0.0)) throw QuadratureFailure("reference_probability_2d: prior weights vanish");
    level.phi = num / den;
    level.second = num2 / den;
    return level;
  });
  return {r.phi, r.second, r.error, r.nodes};
}

std::vector<double> finite_difference_gradient(const std::function<double(std::span<const double>)>& f,
                                               std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference_gradient: h must be > 0");
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double saved = point[j];
    point[j] = saved + h;
    const double up = f(point);
    point[j] = saved - h;
    const double down = f(point);
    point[j] = saved;
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

namespace {

// Standardized margin (b^T x + beta - a^T mu) / ||L^T a|| for one component.
std::pair<double, double> halfspace_margin(std::span<const double> a, std::span<const double> b, double beta,
                                           const GaussianParams& comp, std::span<const double> x) {
  double num = beta;
  for (std::size_t i = 0; i < b.size(); ++i) num += b[i] * x[i];
  for (std::size_t i = 0; i < a.size(); ++i) num -= a[i] * comp.mean[i];
  std::vector<double> lta(a.size());
  comp.chol.apply_transpose(a, lta);
  return {num, std::sqrt(squared_norm(lta))};
}

}  // namespace

double halfspace_mixture_probability(std::span<const double> a, std::span<const double> b, double beta,
                                     const FiniteMixture& mix, std::span<const double> x) {
  mix.validate();
  double p = 0.0;
  for (std::size_t k = 0; k < mix.components.size(); ++k) {
    const auto [num, scale] = halfspace_margin(a, b, beta, mix.components[k], x);
    p += mix.weights[k] * normal_cdf(num / scale);
  }
  return p;
}

std::vector<double> halfspace_mixture_gradient(std::span<const double> a, std::span<const double> b, double beta,
                                               const FiniteMixture& mix, std::span<const double> x) {
  mix.validate();
  std::vector<double> grad(b.size(), 0.0);
  for (std::size_t k = 0; k < mix.components.size(); ++k) {
    const auto [num, scale] = halfspace_margin(a, b, beta, mix.components[k], x);
    const double f = mix.weights[k] * normal_pdf(num / scale) / scale;
    for (std::size_t i = 0; i < b.size(); ++i) grad[i] += f * b[i];
  }
  return grad;
}

}  // namespace srd
