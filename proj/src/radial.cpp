#include "srd/radial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "srd/errors.hpp"

namespace srd {
namespace {

void check_dimensions(const Constraint& cons, const GaussianParams& params, std::span<const double> x,
                      std::span<const double> v) {
  if (static_cast<int>(x.size()) != cons.decision_dimension) {
    throw ConfigError("decision vector has dimension " + std::to_string(x.size()) + ", constraint expects " +
                      std::to_string(cons.decision_dimension));
  }
  if (static_cast<int>(v.size()) != cons.random_dimension || params.dim() != cons.random_dimension) {
    throw ConfigError("direction/model dimension does not match constraint dimension " +
                      std::to_string(cons.random_dimension));
  }
}

}  // namespace

RadialKernel::RadialKernel(const Constraint& cons, RadiusOptions opts)
    : cons_(&cons), opts_(opts), chi_(cons.random_dimension) {
  if (!(opts.tail_probability > 0.0 && opts.tail_probability < 1.0)) {
    throw ConfigError("radius: tail probability must lie in (0, 1)");
  }
  if (!(opts.relative_tolerance > 0.0)) throw ConfigError("radius: tolerance must be > 0");
  r_max_ = chi_.upper_quantile(opts.tail_probability);
}

RadiusResult RadialKernel::radius(const GaussianParams& params, std::span<const double> x,
                                  std::span<const double> v) const {
  check_dimensions(*cons_, params, x, v);
  const Constraint& g = *cons_;
  const std::size_t m = v.size();

  std::vector<double> lv(m);
  params.chol.apply(v, lv);
  std::vector<double> z(m);
  const auto along = [&](double r) {
    for (std::size_t i = 0; i < m; ++i) z[i] = params.mean[i] + r * lv[i];
    return g(x, z);
  };

  RadiusResult rr;
  rr.truncation_radius = r_max_;
  rr.origin_value = g(x, params.mean);
  if (!(rr.origin_value < 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "ray origin infeasible: g(x, mean) = " << rr.origin_value << " >= 0";
    throw SlaterViolation(os.str());
  }

  if (along(r_max_) < 0.0) {
    rr.kind = RayKind::Infinite;
    return rr;
  }

  // Bracket growth by doubling from r = 1; secant slopes along a convex ray
  // never decrease.
  double lo = 0.0;
  double g_lo = rr.origin_value;
  double hi = std::min(1.0, r_max_);
  double g_hi = along(hi);
  double prev_slope = -std::numeric_limits<double>::infinity();
  while (g_hi <= 0.0) {
    const double slope = (g_hi - g_lo) / (hi - lo);
    if (slope < prev_slope - 1e-8 * (1.0 + std::fabs(prev_slope) + std::fabs(slope))) {
      throw ConvexityViolation("constraint is not convex along the ray (secant slope decreased at r=" +
                               std::to_string(hi) + ")");
    }
    prev_slope = slope;
    lo = hi;
    g_lo = g_hi;
    if (hi >= r_max_) break;  // g vanishes exactly at the truncation radius
    hi = std::min(2.0 * hi, r_max_);
    g_hi = along(hi);
  }

  while (hi - lo > opts_.relative_tolerance * (1.0 + hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g_mid = along(mid);
    if (g_mid <= 0.0) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
      g_hi = g_mid;
    }
  }

  // One regula falsi step inside the final bracket.
  double rho = 0.5 * (lo + hi);
  if (g_hi > g_lo) rho = std::clamp(lo - g_lo * (hi - lo) / (g_hi - g_lo), lo, hi);

  rr.kind = RayKind::Finite;
  rr.rho = rho;
  rr.boundary_residual = along(rho);
  rr.boundary_point = z;
  return rr;
}

std::vector<double> RadialKernel::grad_rho(const GaussianParams& params, std::span<const double> x,
                                           std::span<const double> v, const RadiusResult& rr) const {
  if (rr.kind != RayKind::Finite) throw std::invalid_argument("grad_rho: requires a finite ray");
  const std::size_t m = v.size();
  const std::size_t n = x.size();
  std::vector<double> lv(m), gz(m), gx(n);
  params.chol.apply(v, lv);
  cons_->grad_z(x, rr.boundary_point, gz);
  double denom = 0.0;
  for (std::size_t i = 0; i < m; ++i) denom += gz[i] * lv[i];

  // Convexity along the ray forces denom >= -g(x, mean) / rho > 0.
  const double lower = -rr.origin_value / rr.rho;
  if (!(denom > 0.0) || denom < lower - 1e-8 * (1.0 + lower)) {
    std::ostringstream os;
    os.precision(17);
    os << "degenerate boundary: <grad_z g, L v> = " << denom << " below the convexity bound " << lower;
    throw DegenerateBoundary(os.str());
  }
  cons_->grad_x(x, rr.boundary_point, gx);
  for (double& gi : gx) gi = -gi / denom;
  return gx;
}

double RadialKernel::probability(const GaussianParams& params, std::span<const double> x,
                                 std::span<const double> v) const {
  return evaluate(params, x, v, {});
}

double RadialKernel::evaluate(const GaussianParams& params, std::span<const double> x,
                              std::span<const double> v, std::span<double> grad) const {
  const RadiusResult rr = radius(params, x, v);
  if (rr.kind == RayKind::Infinite) {
    std::fill(grad.begin(), grad.end(), 0.0);
    return 1.0;
  }
  if (!grad.empty()) {
    const std::vector<double> dr = grad_rho(params, x, v, rr);
    const double density = chi_.pdf(rr.rho);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = density * dr[i];
  }
  return chi_.cdf(rr.rho);
}

RadiusResult radius(const Constraint& cons, const GaussianParams& params, std::span<const double> x,
                    std::span<const double> v, const RadiusOptions& opts) {
  return RadialKernel(cons, opts).radius(params, x, v);
}

std::vector<double> grad_rho(const Constraint& cons, const GaussianParams& params, std::span<const double> x,
                             std::span<const double> v, const RadiusResult& rr) {
  return RadialKernel(cons).grad_rho(params, x, v, rr);
}

double radial_probability(const Constraint& cons, const ParameterModel& model, const RadialSample& sample,
                          std::span<const double> x, const RadiusOptions& opts) {
  return RadialKernel(cons, opts).probability(model.gaussian_params(sample.parameter), x, sample.direction);
}

std::vector<double> radial_gradient(const Constraint& cons, const ParameterModel& model,
                                    const RadialSample& sample, std::span<const double> x,
                                    const RadiusOptions& opts) {
  std::vector<double> grad(x.size());
  RadialKernel(cons, opts).evaluate(model.gaussian_params(sample.parameter), x, sample.direction, grad);
  return grad;
}

}  // namespace srd
