#pragma once

#include <functional>
#include <span>
#include <vector>

#include "srd/model.hpp"
#include "srd/radial.hpp"

namespace srd {

struct QuadratureSpec {
  int nodes = 32;          // starting nodes per axis, >= 8
  int max_doublings = 6;
  double tolerance = 1e-10;  // accepted change between successive refinements

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;  // |Q(2n) - Q(n)| at the accepted level
  int nodes = 0;
};

struct GradientQuadratureResult {
  std::vector<double> value;
  double error_estimate = 0.0;
  int nodes = 0;
};

// Exact probability for the Beta-prior example: c with (c+1)/2 ~ Beta(delta,
// delta), xi | c ~ N((0, c), I), g(x, z) = ||z||^2 - ||x||^2 - 2. Integrates
// the noncentral chi-square cdf against the prior with Gauss-Jacobi nodes.
QuadratureResult true_probability_example(std::span<const double> x, double delta, const QuadratureSpec& spec = {});

// Gradient of the same function (prior-averaged noncentral density times x).
GradientQuadratureResult true_gradient_example(std::span<const double> x, double delta,
                                               const QuadratureSpec& spec = {});

struct ReferenceMoments {
  double phi = 0.0;            // integral of e_c(x, v)
  double second_moment = 0.0;  // integral of e_c(x, v)^2
  double error_estimate = 0.0;
  int nodes = 0;
};

// Deterministic tensor quadrature of the spherical representation for m = 2
// and a scalar parameter: Gauss-Legendre in the angle, and either the atoms
// of a discrete prior or Gauss-Legendre in u with c = lo + (hi - lo)(1 -
// cos(pi u))/2 weighted by the prior density. Inner values come from the
// ray solver.
ReferenceMoments reference_probability_2d(const Constraint& cons, const ParameterModel& model,
                                          std::span<const double> x, const QuadratureSpec& spec = {},
                                          const RadiusOptions& radius = {});

// Central differences (f(x + h e_j) - f(x - h e_j)) / 2h.
std::vector<double> finite_difference_gradient(const std::function<double(std::span<const double>)>& f,
                                               std::span<const double> x, double h);

// Closed forms for g(x, z) = a^T z - b^T x - beta under a finite mixture.
double halfspace_mixture_probability(std::span<const double> a, std::span<const double> b, double beta,
                                     const FiniteMixture& mix, std::span<const double> x);
std::vector<double> halfspace_mixture_gradient(std::span<const double> a, std::span<const double> b, double beta,
                                               const FiniteMixture& mix, std::span<const double> x);

}  // namespace srd
