#pragma once

#include <span>
#include <vector>

#include "srd/distributions.hpp"
#include "srd/model.hpp"

namespace srd {

// One Monte Carlo draw (v, c) from the sphere times the parameter space.
struct RadialSample {
  std::vector<double> direction;
  Parameter parameter;
};

enum class RayKind { Finite, Infinite };

struct RadiusResult {
  RayKind kind = RayKind::Finite;
  double rho = 0.0;                   // boundary radius (finite rays)
  std::vector<double> boundary_point; // mean + rho * L v (finite rays)
  double truncation_radius = 0.0;     // radius at which the ray was probed
  double origin_value = 0.0;          // g(x, mean), negative by construction
  double boundary_residual = 0.0;     // g(x, boundary_point)
};

struct RadiusOptions {
  // Rays still feasible at the chi quantile with this upper-tail mass are
  // treated as infinite.
  double tail_probability = 1e-12;
  // Bisection stops once the bracket is below this times (1 + rho).
  double relative_tolerance = 1e-12;
};

// Evaluates the ray radius, the radial probability kernel e_c(x, v) and its
// x-gradient for one constraint. Holds the chi law and truncation radius so
// repeated evaluations skip the quantile inversion.
class RadialKernel {
 public:
  explicit RadialKernel(const Constraint& cons, RadiusOptions opts = {});

  const Constraint& constraint() const { return *cons_; }
  const ChiLaw& chi() const { return chi_; }
  double truncation_radius() const { return r_max_; }

  // Throws SlaterViolation when g(x, mean) >= 0 and ConvexityViolation when
  // the sign pattern along the ray is incompatible with convexity in z.
  RadiusResult radius(const GaussianParams& params, std::span<const double> x, std::span<const double> v) const;

  // -grad_x g(x, z*) / <grad_z g(x, z*), L v>; rr must be finite.
  std::vector<double> grad_rho(const GaussianParams& params, std::span<const double> x,
                               std::span<const double> v, const RadiusResult& rr) const;

  double probability(const GaussianParams& params, std::span<const double> x, std::span<const double> v) const;

  // Returns e_c(x, v); writes grad_x e_c(x, v) into grad when it is non-empty.
  double evaluate(const GaussianParams& params, std::span<const double> x, std::span<const double> v,
                  std::span<double> grad) const;

 private:
  const Constraint* cons_;
  RadiusOptions opts_;
  ChiLaw chi_;
  double r_max_;
};

RadiusResult radius(const Constraint& cons, const GaussianParams& params, std::span<const double> x,
                    std::span<const double> v, const RadiusOptions& opts = {});

std::vector<double> grad_rho(const Constraint& cons, const GaussianParams& params, std::span<const double> x,
                             std::span<const double> v, const RadiusResult& rr);

double radial_probability(const Constraint& cons, const ParameterModel& model, const RadialSample& sample,
                          std::span<const double> x, const RadiusOptions& opts = {});

std::vector<double> radial_gradient(const Constraint& cons, const ParameterModel& model,
                                    const RadialSample& sample, std::span<const double> x,
                                    const RadiusOptions& opts = {});

}  // namespace srd
